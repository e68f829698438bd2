#include "routeseq/stop_completion.hpp"

#include <algorithm>
#include <cmath>

#include "routeseq/error.hpp"

namespace routeseq {

namespace {

std::vector<std::size_t> smallest_k(const std::vector<std::size_t>& members, const std::vector<double>& key,
                                    std::size_t k) {
  std::vector<std::size_t> idx(members.size());
  for (std::size_t a = 0; a < idx.size(); ++a) idx[a] = a;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return members[a] < members[b];
  });
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < std::min(k, idx.size()); ++a) out.push_back(members[idx[a]]);
  return out;
}

void check_permutation(const std::vector<std::size_t>& zone_order, std::size_t n) {
  if (zone_order.size() != n) throw InvalidInput("zone order must list every zone once");
  std::vector<bool> seen(n, false);
  for (std::size_t z : zone_order) {
    if (z >= n || seen[z]) throw InvalidInput("zone order is not a permutation");
    seen[z] = true;
  }
}

}  // namespace

std::vector<std::size_t> candidate_first_stops(const std::vector<std::size_t>& members, std::size_t prev,
                                               const RouteInstance& route, std::size_t k) {
  std::vector<double> key;
  for (std::size_t s : members) key.push_back(route.travel_time(prev, s));
  return smallest_k(members, key, k);
}

std::vector<std::size_t> candidate_last_stops(const std::vector<std::size_t>& members,
                                              const std::vector<std::size_t>& next_nodes,
                                              const RouteInstance& route, std::size_t k) {
  std::vector<double> key;
  for (std::size_t s : members) {
    double sum = 0.0;
    for (std::size_t t : next_nodes) sum += route.travel_time(s, t);
    key.push_back(sum / static_cast<double>(next_nodes.size()));
  }
  return smallest_k(members, key, k);
}

ZonePath best_zone_path(const std::vector<std::size_t>& members, const std::vector<std::size_t>& firsts,
                        const std::vector<std::size_t>& lasts, const RouteInstance& route,
                        const tsp::SolverOptions& solver) {
  if (members.empty()) throw InvalidInput("zone has no stops");
  std::vector<std::size_t> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  const auto local = [&](std::size_t node) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), node);
    if (it == sorted.end() || *it != node) throw InvalidInput("candidate stop is not a zone member");
    return static_cast<std::size_t>(it - sorted.begin());
  };
  const tsp::CostMatrix sub = tsp::submatrix(route.travel_time, sorted);

  ZonePath best;
  bool have = false;
  for (std::size_t f : firsts) {
    for (std::size_t l : lasts) {
      tsp::TspSolution sol;
      if (f == l) {
        sol = tsp::solve_tour(sub, local(f), solver);
      } else {
        sol = tsp::solve_path(sub, local(f), local(l), solver);
      }
      ZonePath cand;
      for (std::size_t v : sol.order) cand.stops.push_back(sorted[v]);
      cand.travel_time = tsp::route_cost(sol.order, sub, false);
      const double tol = 1e-9 * std::max(1.0, std::abs(cand.travel_time));
      const bool better = !have || cand.travel_time < best.travel_time - tol ||
                          (std::abs(cand.travel_time - best.travel_time) <= tol && cand.stops < best.stops);
      if (better) {
        best = std::move(cand);
        have = true;
      }
    }
  }
  return best;
}

std::vector<ZonePath> zone_paths(const std::vector<std::size_t>& zone_order, const ZoneInstance& instance,
                                 const RouteInstance& route, const CompletionOptions& opts) {
  check_permutation(zone_order, instance.n_zones());
  std::vector<ZonePath> paths;
  std::size_t prev = 0;
  for (std::size_t pos = 0; pos < zone_order.size(); ++pos) {
    const auto& members = instance.zones[zone_order[pos]].member_stops;
    const std::vector<std::size_t> next =
        pos + 1 < zone_order.size() ? instance.zones[zone_order[pos + 1]].member_stops : std::vector<std::size_t>{0};
    const auto firsts = candidate_first_stops(members, prev, route, opts.candidates);
    const auto lasts = candidate_last_stops(members, next, route, opts.candidates);
    paths.push_back(best_zone_path(members, firsts, lasts, route, opts.solver));
    prev = paths.back().stops.back();
  }
  return paths;
}

std::vector<std::size_t> complete_sequence(const std::vector<std::size_t>& zone_order, const ZoneInstance& instance,
                                           const RouteInstance& route, const CompletionOptions& opts) {
  std::vector<std::size_t> seq{0};
  for (const auto& p : zone_paths(zone_order, instance, route, opts)) seq.insert(seq.end(), p.stops.begin(), p.stops.end());
  seq.push_back(0);
  return seq;
}

}  // namespace routeseq
