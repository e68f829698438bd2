#include "routeseq/inference.hpp"

#include "routeseq/error.hpp"
#include "routeseq/tsp.hpp"

namespace routeseq {

std::string to_string(GenerationMode m) { return m == GenerationMode::greedy ? "greedy" : "first_zone_iterated"; }

double operational_cost(const std::vector<std::size_t>& zone_order, const ZoneInstance& instance) {
  std::vector<std::size_t> nodes{0};
  for (std::size_t z : zone_order) nodes.push_back(z + 1);
  return tsp::route_cost(nodes, instance.zone_travel_time, true);
}

PredictedSequence greedy_decode(const model::ModelParams& params, const model::ModelInput& input,
                                const ZoneInstance& instance, std::optional<std::size_t> forced_first,
                                kernels::Exec exec) {
  if (input.n != instance.n_zones()) throw InvalidInput("model input and zone instance disagree on zone count");
  if (forced_first && *forced_first >= input.n) throw InvalidInput("forced first zone is not in the instance");
  model::Rollout rollout(params, input, false, exec);
  std::vector<bool> visited(input.n, false);
  PredictedSequence out;
  for (std::size_t step = 0; step < input.n; ++step) {
    std::size_t pick = input.n;
    if (step == 0 && forced_first) {
      rollout.attention();
      pick = *forced_first;
    } else {
      const Vector& a = rollout.attention();
      for (std::size_t j = 0; j < input.n; ++j) {
        if (visited[j]) continue;
        if (pick == input.n || a[j] > a[pick]) pick = j;
      }
    }
    visited[pick] = true;
    out.zone_order.push_back(pick);
    rollout.advance(pick);
  }
  out.steps = rollout.traces();
  out.operational_cost = operational_cost(out.zone_order, instance);
  out.mode = GenerationMode::greedy;
  return out;
}

PredictedSequence generate_best_first(const model::ModelParams& params, const model::ModelInput& input,
                                      const ZoneInstance& instance, const GenerationOptions& opts) {
  const std::size_t n = input.n;
  if (n == 0) throw InvalidInput("generate_best_first: empty instance");
  const std::size_t count = opts.strict ? n : n + 1;
  std::vector<PredictedSequence> candidates(count);
  kernels::for_each_index(
      count,
      [&](std::size_t c) {
        candidates[c] = c < n ? greedy_decode(params, input, instance, c) : greedy_decode(params, input, instance);
      },
      opts.exec);
  std::size_t best = 0;
  for (std::size_t c = 1; c < count; ++c)
    if (candidates[c].operational_cost < candidates[best].operational_cost) best = c;
  PredictedSequence out = std::move(candidates[best]);
  out.mode = GenerationMode::first_zone_iterated;
  return out;
}

}  // namespace routeseq
