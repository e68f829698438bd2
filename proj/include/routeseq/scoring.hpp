#pragma once

// Sequence-similarity metrics: sequence deviation, edit distance with real
// penalty over normalized travel times, their combined disparity score and
// positional first-k accuracy.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "routeseq/core_model.hpp"
#include "routeseq/kernels.hpp"
#include "routeseq/stop_completion.hpp"
#include "routeseq/tensor.hpp"

namespace routeseq::scoring {

using Sequence = std::vector<std::size_t>;

// `predicted` must be a permutation of `actual`; 0 for sequences shorter than 2.
double sequence_deviation(const Sequence& actual, const Sequence& predicted);

// Travel time from `from` to `to` divided by the row sum over stop nodes
// 1..n of `travel_time`; 0 when that row sum is 0.
double normalized_time(const Tensor& travel_time, std::size_t from, std::size_t to);

struct ErpResult {
  double norm = 0.0;      // optimal alignment cost
  std::size_t edits = 0;  // non-zero-cost operations on the chosen alignment
};

// Match / delete / insert dynamic program with node `gap` (the depot) as the
// gap element. Backtracking prefers match, then delete, then insert.
ErpResult erp(const Sequence& actual, const Sequence& predicted, const Tensor& travel_time, std::size_t gap = 0);

double disparity(const Sequence& actual, const Sequence& predicted, const Tensor& travel_time);

std::vector<int> first_k_accuracy(const Sequence& actual_zones, const Sequence& predicted_zones, std::size_t k);

struct RouteScore {
  std::string route_id;
  double disparity = 0.0;
  double sd = 0.0;
  double erp_norm = 0.0;
  std::size_t erp_edits = 0;
  std::vector<int> first_k;
  double operational_cost = 0.0;  // zone level, depot legs included
};

struct RouteFailure {
  std::string route_id;
  std::string message;
};

struct DisparityReport {
  std::vector<RouteScore> routes;
  std::vector<RouteFailure> failures;
  std::size_t k = 4;
  double mean_disparity = 0.0;
  double std_disparity = 0.0;  // population
  double median_disparity = 0.0;
  std::vector<double> accuracy;  // mean hit rate per position 1..k
  double mean_operational_cost = 0.0;
};

// Stop-level score of one predicted zone order, expanded with stop completion
// unless `predicted_stops` (without depot) is given.
RouteScore score_route(const RouteInstance& route, const ZoneInstance& zones, const Sequence& predicted_zones,
                       const std::optional<Sequence>& predicted_stops, std::size_t k,
                       const CompletionOptions& completion = {});

DisparityReport aggregate(std::vector<RouteScore> scores, std::vector<RouteFailure> failures, std::size_t k);

struct Prediction {
  Sequence zone_order;
  std::optional<Sequence> stop_sequence;  // without depot
};

struct EvaluationOptions {
  std::size_t k = 4;
  kernels::Exec exec = kernels::Exec::parallel;
  CompletionOptions completion;
};

// Runs `predict(i)` for every route (possibly concurrently), scores and
// aggregates. Routes whose prediction or scoring throws are listed in
// `failures` and excluded from the aggregates.
DisparityReport evaluate_testset(const std::vector<const RouteInstance*>& routes,
                                 const std::function<Prediction(std::size_t)>& predict,
                                 const EvaluationOptions& opts = {});

}  // namespace routeseq::scoring
