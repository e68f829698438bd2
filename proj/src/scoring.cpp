#include "routeseq/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "routeseq/error.hpp"
#include "routeseq/inference.hpp"

namespace routeseq::scoring {

double sequence_deviation(const Sequence& actual, const Sequence& predicted) {
  const std::size_t n = actual.size();
  if (predicted.size() != n) throw InvalidInput("sequence_deviation: sequences differ in length");
  std::vector<std::size_t> sorted_a = actual, sorted_b = predicted;
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_b.begin(), sorted_b.end());
  if (sorted_a != sorted_b || std::adjacent_find(sorted_a.begin(), sorted_a.end()) != sorted_a.end())
    throw InvalidInput("sequence_deviation: predicted is not a permutation of actual");
  if (n < 2) return 0.0;

  std::vector<long long> position(*std::max_element(actual.begin(), actual.end()) + 1, 0);
  for (std::size_t k = 0; k < n; ++k) position[actual[k]] = static_cast<long long>(k);
  long long total = 0;
  for (std::size_t k = 1; k < n; ++k) total += std::llabs(position[predicted[k]] - position[predicted[k - 1]]) - 1;
  return 2.0 * static_cast<double>(total) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double normalized_time(const Tensor& travel_time, std::size_t from, std::size_t to) {
  double row = 0.0;
  for (std::size_t j = 1; j < travel_time.cols; ++j) row += travel_time(from, j);
  if (row <= 0.0) return 0.0;
  return travel_time(from, to) / row;
}

ErpResult erp(const Sequence& a, const Sequence& b, const Tensor& tt, std::size_t gap) {
  const std::size_t p = a.size(), q = b.size();
  for (std::size_t s : a)
    if (s >= tt.rows) throw InvalidInput("erp: stop index out of range");
  for (std::size_t s : b)
    if (s >= tt.rows) throw InvalidInput("erp: stop index out of range");

  // Row normalizers once per node.
  std::vector<double> row_sum(tt.rows, 0.0);
  for (std::size_t i = 0; i < tt.rows; ++i)
    for (std::size_t j = 1; j < tt.cols; ++j) row_sum[i] += tt(i, j);
  const auto cost = [&](std::size_t from, std::size_t to) {
    return row_sum[from] > 0.0 ? tt(from, to) / row_sum[from] : 0.0;
  };

  Tensor D(p + 1, q + 1);
  for (std::size_t i = 1; i <= p; ++i) D(i, 0) = D(i - 1, 0) + cost(a[i - 1], gap);
  for (std::size_t j = 1; j <= q; ++j) D(0, j) = D(0, j - 1) + cost(gap, b[j - 1]);
  for (std::size_t i = 1; i <= p; ++i) {
    for (std::size_t j = 1; j <= q; ++j) {
      const double match = D(i - 1, j - 1) + cost(a[i - 1], b[j - 1]);
      const double del = D(i - 1, j) + cost(a[i - 1], gap);
      const double ins = D(i, j - 1) + cost(gap, b[j - 1]);
      D(i, j) = std::min({match, del, ins});
    }
  }

  ErpResult out;
  out.norm = D(p, q);
  std::size_t i = p, j = q;
  while (i > 0 || j > 0) {
    const double here = D(i, j);
    const double tol = 1e-12 * std::max(1.0, std::abs(here));
    double c = 0.0;
    if (i > 0 && j > 0 && std::abs(D(i - 1, j - 1) + (c = cost(a[i - 1], b[j - 1])) - here) <= tol) {
      --i;
      --j;
    } else if (i > 0 && std::abs(D(i - 1, j) + (c = cost(a[i - 1], gap)) - here) <= tol) {
      --i;
    } else {
      c = cost(gap, b[j - 1]);
      --j;
    }
    if (c > 0.0) ++out.edits;
  }
  return out;
}

double disparity(const Sequence& actual, const Sequence& predicted, const Tensor& travel_time) {
  const double sd = sequence_deviation(actual, predicted);
  const ErpResult e = erp(actual, predicted, travel_time);
  if (e.edits == 0) return 0.0;
  return sd * e.norm / static_cast<double>(e.edits);
}

std::vector<int> first_k_accuracy(const Sequence& actual, const Sequence& predicted, std::size_t k) {
  if (k > actual.size() || k > predicted.size())
    throw InvalidInput("first_k_accuracy: k exceeds the number of zones");
  std::vector<int> hits(k, 0);
  for (std::size_t i = 0; i < k; ++i) hits[i] = actual[i] == predicted[i] ? 1 : 0;
  return hits;
}

RouteScore score_route(const RouteInstance& route, const ZoneInstance& zones, const Sequence& predicted_zones,
                       const std::optional<Sequence>& predicted_stops, std::size_t k,
                       const CompletionOptions& completion) {
  Sequence stops;
  if (predicted_stops) {
    stops = *predicted_stops;
  } else {
    const auto full = complete_sequence(predicted_zones, zones, route, completion);
    stops.assign(full.begin() + 1, full.end() - 1);
  }
  RouteScore s;
  s.route_id = route.route_id;
  s.sd = sequence_deviation(route.actual_stop_sequence, stops);
  const ErpResult e = erp(route.actual_stop_sequence, stops, route.travel_time);
  s.erp_norm = e.norm;
  s.erp_edits = e.edits;
  s.disparity = e.edits == 0 ? 0.0 : s.sd * e.norm / static_cast<double>(e.edits);
  s.first_k = first_k_accuracy(zones.actual_zone_sequence, predicted_zones, k);
  s.operational_cost = operational_cost(predicted_zones, zones);
  return s;
}

DisparityReport aggregate(std::vector<RouteScore> scores, std::vector<RouteFailure> failures, std::size_t k) {
  DisparityReport r;
  r.k = k;
  r.accuracy.assign(k, 0.0);
  r.routes = std::move(scores);
  r.failures = std::move(failures);
  const std::size_t m = r.routes.size();
  if (m == 0) return r;
  std::vector<double> values;
  for (const auto& s : r.routes) {
    values.push_back(s.disparity);
    r.mean_operational_cost += s.operational_cost;
    for (std::size_t i = 0; i < k; ++i) r.accuracy[i] += s.first_k[i];
  }
  const double count = static_cast<double>(m);
  r.mean_disparity = std::accumulate(values.begin(), values.end(), 0.0) / count;
  double var = 0.0;
  for (double v : values) var += (v - r.mean_disparity) * (v - r.mean_disparity);
  r.std_disparity = std::sqrt(var / count);
  std::sort(values.begin(), values.end());
  r.median_disparity = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  for (double& a : r.accuracy) a /= count;
  r.mean_operational_cost /= count;
  return r;
}

DisparityReport evaluate_testset(const std::vector<const RouteInstance*>& routes,
                                 const std::function<Prediction(std::size_t)>& predict,
                                 const EvaluationOptions& opts) {
  if (routes.empty()) throw InvalidInput("evaluate_testset: no routes");
  std::vector<std::optional<RouteScore>> scores(routes.size());
  std::vector<std::string> errors(routes.size());
  kernels::for_each_index(
      routes.size(),
      [&](std::size_t i) {
        try {
          const ZoneInstance zones = build_zone_instance(*routes[i]);
          const Prediction p = predict(i);
          scores[i] = score_route(*routes[i], zones, p.zone_order, p.stop_sequence, opts.k, opts.completion);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      },
      opts.exec);
  std::vector<RouteScore> ok;
  std::vector<RouteFailure> failed;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (scores[i]) {
      ok.push_back(std::move(*scores[i]));
    } else {
      failed.push_back({routes[i]->route_id, errors[i]});
    }
  }
  return aggregate(std::move(ok), std::move(failed), opts.k);
}

}  // namespace routeseq::scoring
