#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "routeseq/core_model.hpp"
#include "routeseq/kernels.hpp"
#include "routeseq/model.hpp"

namespace routeseq {

enum class GenerationMode { greedy, first_zone_iterated };
std::string to_string(GenerationMode m);

struct PredictedSequence {
  std::vector<std::size_t> zone_order;
  std::vector<model::DecoderStepTrace> steps;
  double operational_cost = 0.0;  // depot -> zones -> depot on zone travel times
  GenerationMode mode = GenerationMode::greedy;
};

double operational_cost(const std::vector<std::size_t>& zone_order, const ZoneInstance& instance);

// Argmax over unvisited zones at every step, smallest index on ties. With
// `forced_first`, the first pick is overridden and decoding continues from it.
PredictedSequence greedy_decode(const model::ModelParams& params, const model::ModelInput& input,
                                const ZoneInstance& instance, std::optional<std::size_t> forced_first = std::nullopt,
                                kernels::Exec exec = kernels::Exec::serial);

struct GenerationOptions {
  // Only the n forced-first rollouts compete; otherwise the unforced greedy
  // rollout is a candidate too.
  bool strict = false;
  kernels::Exec exec = kernels::Exec::parallel;
};

// Greedy rollouts from every possible first zone; returns the one with the
// lowest operational cost (smallest first-zone index on ties, and the
// unforced rollout last).
PredictedSequence generate_best_first(const model::ModelParams& params, const model::ModelInput& input,
                                      const ZoneInstance& instance, const GenerationOptions& opts = {});

}  // namespace routeseq
