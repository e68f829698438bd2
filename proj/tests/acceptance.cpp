// Acceptance gate: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "routeseq/datagen.hpp"
#include "routeseq/dataset_io.hpp"
#include "routeseq/inference.hpp"
#include "routeseq/pipeline.hpp"
#include "routeseq/stop_completion.hpp"
#include "routeseq/training.hpp"
#include "routeseq/tsp.hpp"

using namespace routeseq;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. ERP dynamic program vs exhaustive edit scripts; SD hand values.

Outcome metric_oracles() {
  Outcome out;
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::size_t norm_bad = 0, edits_bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = len(rng);
    const auto tt = oracle::random_costs(n + 1, rng);
    std::vector<std::size_t> a(n);
    std::iota(a.begin(), a.end(), 1);
    auto b = a;
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    const auto dp = scoring::erp(a, b, tt);
    const auto bf = oracle::brute_erp(a, b, tt);
    const double gap = std::abs(dp.norm - bf.norm);
    worst = std::max(worst, gap);
    norm_bad += gap > 1e-12;
    edits_bad += dp.edits != bf.edits;
  }
  const double sd0 = scoring::sequence_deviation({1, 2, 3, 4}, {1, 2, 3, 4});
  const double sd1 = scoring::sequence_deviation({1, 2, 3, 4}, {1, 3, 2, 4});
  const double sd2 = scoring::sequence_deviation({1, 2, 3}, {3, 2, 1});
  const bool sd_ok = sd0 == 0.0 && sd1 == 1.0 / 3.0 && sd2 == 0.0;
  out.pass = norm_bad == 0 && edits_bad == 0 && sd_ok;
  out.detail = "200 pairs: ERP_norm mismatches " + std::to_string(norm_bad) + " (max gap " + fmt("%.2e", worst) +
               "), ERP_e mismatches " + std::to_string(edits_bad) + "; SD = " + fmt("%.17g", sd0) + ", " +
               fmt("%.17g", sd1) + ", " + fmt("%.17g", sd2);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Finite-difference gradients, every variant, 3 zones, 10 seeds.

Outcome gradient_fidelity() {
  Outcome out;
  std::ostringstream detail;
  for (model::Variant v : model::kAllVariants) {
    double worst = 0.0;
    std::size_t failures = 0, checked = 0;
    std::string where;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      for (bool mask : {true, false}) {
        std::mt19937_64 rng(1000 + seed);
        const auto dims = oracle::default_dims(v);
        nn::Rng init(seed);
        const auto params = model::ModelParams::random(v, dims, init);
        const auto in = oracle::random_input(3, dims, rng);
        std::vector<std::size_t> target{0, 1, 2};
        std::shuffle(target.begin(), target.end(), rng);
        const auto r = oracle::check_gradients(in, target, params, mask, rng, 24, 1e-5, 1e-4);
        checked += r.checked;
        failures += r.failures;
        if (r.worst_rel > worst) {
          worst = r.worst_rel;
          where = r.worst_name;
        }
      }
    }
    if (failures > 0 || worst >= 1e-4) out.pass = false;
    detail << model::to_string(v) << " max rel " << fmt("%.1e", worst) << " at " << where << " (" << checked << " entries, "
           << failures << " fail) ";
  }
  out.detail = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// 3. Held-Karp vs brute force, heuristic ordering.

Outcome tsp_correctness() {
  Outcome out;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::size_t tour_bad = 0, path_bad = 0, order_bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = size(rng);
    const auto c = oracle::random_costs(n, rng);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    const std::size_t origin = node(rng);
    std::size_t first = node(rng), last = node(rng);
    while (last == first) last = node(rng);

    const auto bt = oracle::brute_tour(c, origin);
    const auto ht = tsp::held_karp_tour(c, origin);
    if (ht.order != bt.order || std::abs(ht.cost - bt.cost) > 1e-9 * bt.cost) ++tour_bad;
    const auto bp = oracle::brute_path(c, first, last);
    const auto hp = tsp::held_karp_path(c, first, last);
    if (hp.order != bp.order || std::abs(hp.cost - bp.cost) > 1e-9 * bp.cost) ++path_bad;

    const auto nn_t = tsp::nearest_neighbor_tour(c, origin);
    const auto opt_t = tsp::two_opt(nn_t, c);
    const auto nn_p = tsp::nearest_neighbor_path(c, first, last);
    const auto opt_p = tsp::two_opt(nn_p, c);
    const auto heur_t = tsp::heuristic_tour(c, origin);
    const auto heur_p = tsp::heuristic_path(c, first, last);
    const bool ok = opt_t.cost <= nn_t.cost && opt_p.cost <= nn_p.cost && heur_t.cost >= ht.cost - 1e-9 &&
                    heur_p.cost >= hp.cost - 1e-9 && opt_t.cost >= ht.cost - 1e-9 && opt_p.cost >= hp.cost - 1e-9;
    order_bad += !ok;
  }
  out.pass = tour_bad == 0 && path_bad == 0 && order_bad == 0;
  out.detail = "50 instances: tour mismatches " + std::to_string(tour_bad) + ", path mismatches " +
               std::to_string(path_bad) + ", heuristic ordering violations " + std::to_string(order_bad);
  return out;
}

// ---------------------------------------------------------------------------
// 6-8 share one dataset and trained models.

struct Experiment {
  std::unique_ptr<PreparedRoutes> train, test;
  std::unique_ptr<training::TrainResult> ordered, shuffled, repeat;
  training::TrainConfig config;
  double seconds_ordered = 0.0;
};

training::TrainConfig planted_config() {
  training::TrainConfig c;
  c.variant = model::Variant::pairwise;
  c.epochs = 30;
  c.seed = 11;
  return c;
}

datagen::SynthConfig planted_data() {
  datagen::SynthConfig d;
  d.n_routes = 500;
  d.behavior = datagen::Behavior::cluster_biased;
  d.seed = 2024;
  return d;
}

Experiment& experiment() {
  static Experiment e = [] {
    Experiment x;
    auto split = training::split_dataset(datagen::generate(planted_data()), 0.8, 7);
    x.train = std::make_unique<PreparedRoutes>(std::move(split.train));
    x.test = std::make_unique<PreparedRoutes>(std::move(split.test));
    x.config = planted_config();
    x.ordered = std::make_unique<training::TrainResult>(training::train(x.train->views(), x.config));
    return x;
  }();
  return e;
}

// ---------------------------------------------------------------------------
// 4. Best-first generation returns the cheapest candidate and never loses to greedy.

Outcome best_first_contract() {
  Outcome out;
  auto& e = experiment();
  std::size_t routes = 0, not_min = 0, worse_than_greedy = 0;
  const auto check = [&](const model::ModelParams& params, const RouteModel& m, const RouteView& view) {
    const auto in = make_model_input(view, m);
    const std::size_t n = view.zones.n_zones();
    const auto greedy = greedy_decode(params, in, view.zones);
    std::vector<std::size_t> best_order = greedy.zone_order;
    double best = std::numeric_limits<double>::infinity();
    bool have = false;
    for (std::size_t f = 0; f < n; ++f) {
      const auto cand = greedy_decode(params, in, view.zones, f);
      if (!have || cand.operational_cost < best) {
        best = cand.operational_cost;
        best_order = cand.zone_order;
        have = true;
      }
    }
    if (greedy.operational_cost < best) {
      best = greedy.operational_cost;
      best_order = greedy.zone_order;
    }
    const auto got = generate_best_first(params, in, view.zones);
    ++routes;
    not_min += got.operational_cost != best || got.zone_order != best_order;
    worse_than_greedy += got.operational_cost > greedy.operational_cost;
  };
  for (const auto& view : e.test->views()) check(e.ordered->model.params, e.ordered->model, view);
  // untrained models of every variant on the same routes
  for (model::Variant v : model::kAllVariants) {
    RouteModel m = e.ordered->model;
    auto dims = m.params.dims;
    if (v == model::Variant::lstm_ed) {
      m.vocabulary = build_vocabulary(e.train->views());
      dims.n_classes = m.vocabulary.size();
    }
    nn::Rng rng(5);
    m.params = model::ModelParams::random(v, dims, rng);
    for (std::size_t k = 0; k < 25; ++k) check(m.params, m, e.test->views()[k]);
  }
  out.pass = not_min == 0 && worse_than_greedy == 0;
  out.detail = std::to_string(routes) + " routes: not the cheapest candidate " + std::to_string(not_min) +
               ", above greedy OC " + std::to_string(worse_than_greedy);
  return out;
}

// ---------------------------------------------------------------------------
// 5. Stop completion vs brute force per zone.

struct ZoneOracle {
  std::vector<std::size_t> stops;
  double cost = std::numeric_limits<double>::infinity();
};

ZoneOracle brute_zone(const std::vector<std::size_t>& members_in, std::size_t prev,
                      const std::vector<std::size_t>& next, const Tensor& tt) {
  std::vector<std::size_t> members = members_in;
  std::sort(members.begin(), members.end());
  const auto top3 = [&](const std::function<double(std::size_t)>& key) {
    std::vector<std::size_t> m = members;
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
      return key(a) < key(b) || (key(a) == key(b) && a < b);
    });
    if (m.size() > 3) m.resize(3);
    return m;
  };
  const auto firsts = top3([&](std::size_t s) { return tt(prev, s); });
  const auto lasts = top3([&](std::size_t s) {
    double t = 0.0;
    for (std::size_t q : next) t += tt(s, q);
    return t / static_cast<double>(next.size());
  });
  ZoneOracle best;
  if (members.size() == 1) return {members, 0.0};
  const auto consider = [&](const std::vector<std::size_t>& seq, double cost) {
    if (cost < best.cost - 1e-9 || (std::abs(cost - best.cost) <= 1e-9 && seq < best.stops)) {
      best.cost = cost;
      best.stops = seq;
    }
  };
  for (std::size_t f : firsts) {
    for (std::size_t l : lasts) {
      std::vector<std::size_t> perm = members;
      std::optional<std::vector<std::size_t>> pick;
      double pick_cost = std::numeric_limits<double>::infinity();
      do {
        if (perm.front() != f) continue;
        if (f != l) {
          if (perm.back() != l) continue;
          const double c = oracle::path_cost(perm, tt, false);
          if (c < pick_cost - 1e-9) {
            pick_cost = c;
            pick = perm;
          }
        } else {
          const double c = oracle::path_cost(perm, tt, true);
          if (c < pick_cost - 1e-9) {
            pick_cost = c;
            pick = perm;
          }
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (pick) consider(*pick, oracle::path_cost(*pick, tt, false));
    }
  }
  return best;
}

Outcome completion_correctness() {
  Outcome out;
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> stops(1, 6), zones(3, 6);
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  while (checked < 100) {
    std::vector<std::size_t> sizes(zones(rng));
    for (auto& s : sizes) s = stops(rng);
    const auto route = oracle::random_route(sizes, rng, "Z" + std::to_string(checked));
    const auto zi = build_zone_instance(route);
    std::vector<std::size_t> order(zi.n_zones());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto paths = zone_paths(order, zi, route);
    std::size_t prev = 0;
    for (std::size_t k = 0; k < order.size() && checked < 100; ++k) {
      const auto& members = zi.zones[order[k]].member_stops;
      const std::vector<std::size_t> next =
          k + 1 < order.size() ? zi.zones[order[k + 1]].member_stops : std::vector<std::size_t>{0};
      const auto want = brute_zone(members, prev, next, route.travel_time);
      const double gap = std::abs(paths[k].travel_time - want.cost);
      worst = std::max(worst, gap);
      bad += paths[k].stops != want.stops || gap > 1e-9 * std::max(1.0, want.cost);
      ++checked;
      prev = paths[k].stops.back();
    }
  }
  out.pass = bad == 0;
  out.detail = std::to_string(checked) + " zones of 1-6 stops: mismatches " + std::to_string(bad) + " (max cost gap " +
               fmt("%.2e", worst) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// 6. Planted-signal learning.

Outcome planted_signal() {
  Outcome out;
  auto& e = experiment();
  const auto tsp = evaluate_tsp(*e.test);
  const auto model = evaluate_model(e.ordered->model, *e.test);
  out.pass = model.failures.empty() && model.mean_disparity < tsp.mean_disparity && model.accuracy.at(0) >= 0.5;
  out.detail = "mean R " + fmt("%.6g", model.mean_disparity) + " vs TSP " + fmt("%.6g", tsp.mean_disparity) +
               ", first-zone accuracy " + fmt("%.3f", model.accuracy.at(0)) + " (TSP " + fmt("%.3f", tsp.accuracy.at(0)) +
               "), final loss " + fmt("%.4f", e.ordered->report.epoch_loss.back()) + ", training " +
               fmt("%.1f", e.ordered->report.wall_seconds) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Random input order.

Outcome input_order_robustness() {
  Outcome out;
  auto& e = experiment();
  auto cfg = e.config;
  cfg.input_order = InputOrder::random;
  e.shuffled = std::make_unique<training::TrainResult>(training::train(e.train->views(), cfg));
  const auto tsp = evaluate_tsp(*e.test);
  const double ordered = evaluate_model(e.ordered->model, *e.test).mean_disparity;
  const double shuffled = evaluate_model(e.shuffled->model, *e.test).mean_disparity;
  const double degradation = (shuffled - ordered) / ordered;
  out.pass = degradation < 0.25 && shuffled < tsp.mean_disparity;
  out.detail = "mean R tsp-order " + fmt("%.6g", ordered) + ", random-order " + fmt("%.6g", shuffled) +
               " (relative change " + fmt("%+.1f%%", 100.0 * degradation) + "), TSP " + fmt("%.6g", tsp.mean_disparity);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Determinism.

std::string predictions_text(const RouteModel& m, const PreparedRoutes& routes, kernels::Exec exec) {
  PredictOptions o;
  o.exec = exec;
  const auto pred = predict_all(m, routes, o);
  std::vector<io::RoutePrediction> rows;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    const auto& view = routes.views()[i];
    rows.push_back(io::describe_prediction(routes.routes()[i], view.zones, pred[i].zone_order,
                                           complete_sequence(pred[i].zone_order, view.zones, routes.routes()[i]),
                                           pred[i].operational_cost));
  }
  return io::predictions_to_json(rows).dump();
}

Outcome determinism() {
  Outcome out;
  auto& e = experiment();
  const bool data_same =
      io::routes_to_json(datagen::generate(planted_data())).dump() == io::routes_to_json(datagen::generate(planted_data())).dump();
  auto split = training::split_dataset(datagen::generate(planted_data()), 0.8, 7);
  const PreparedRoutes train2(std::move(split.train));
  const PreparedRoutes test2(std::move(split.test));
  const auto again = training::train(train2.views(), e.config);
  const bool ckpt_same = checkpoint_json(again.model) == checkpoint_json(e.ordered->model);
  const bool loss_same = again.report.epoch_loss == e.ordered->report.epoch_loss;
  const bool pred_same = predictions_text(again.model, test2, kernels::Exec::parallel) ==
                         predictions_text(e.ordered->model, *e.test, kernels::Exec::parallel);
  const bool exec_same = predictions_text(e.ordered->model, *e.test, kernels::Exec::serial) ==
                         predictions_text(e.ordered->model, *e.test, kernels::Exec::parallel);
  const bool report_same = io::report_to_json(evaluate_model(again.model, test2)).dump() ==
                           io::report_to_json(evaluate_model(e.ordered->model, *e.test)).dump();
  out.pass = data_same && ckpt_same && loss_same && pred_same && exec_same && report_same;
  const auto yes = [](bool b) { return b ? "identical" : "DIFFERENT"; };
  out.detail = std::string("dataset ") + yes(data_same) + ", checkpoint " + yes(ckpt_same) + ", losses " + yes(loss_same) +
               ", predictions " + yes(pred_same) + ", serial vs parallel " + yes(exec_same) + ", report " +
               yes(report_same);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  // Criterion 6 trains the shared model; 4, 7 and 8 reuse it.
  const Criterion criteria[] = {
      {1, "metric oracle equivalence", 10.0, metric_oracles},
      {2, "gradient fidelity", 60.0, gradient_fidelity},
      {3, "TSP correctness", 60.0, tsp_correctness},
      {5, "stop completion correctness", 60.0, completion_correctness},
      {6, "planted-signal learning", 900.0, planted_signal},
      {4, "best-first contract", 60.0, best_first_contract},
      {7, "input-order robustness", 900.0, input_order_robustness},
      {8, "determinism", 900.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("threw: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %d (%s): %s [%.1f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
