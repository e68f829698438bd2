#pragma once

// Expands a zone order into a full stop sequence: each zone is traversed by
// the cheapest within-zone path among candidate entry/exit stops.

#include <cstddef>
#include <vector>

#include "routeseq/core_model.hpp"
#include "routeseq/tsp.hpp"

namespace routeseq {

struct ZonePath {
  std::vector<std::size_t> stops;  // node indices, every member exactly once
  double travel_time = 0.0;        // within-zone legs only
};

struct CompletionOptions {
  std::size_t candidates = 3;
  tsp::SolverOptions solver;
};

// The `k` members closest (travel time from `prev`) to the previous exit stop.
std::vector<std::size_t> candidate_first_stops(const std::vector<std::size_t>& members, std::size_t prev,
                                               const RouteInstance& route, std::size_t k);

// The `k` members with the smallest mean travel time into `next_nodes`.
std::vector<std::size_t> candidate_last_stops(const std::vector<std::size_t>& members,
                                              const std::vector<std::size_t>& next_nodes,
                                              const RouteInstance& route, std::size_t k);

// Cheapest path over all (first, last) candidate pairs. When first == last
// the optimal tour from `first` is used with its closing edge removed.
ZonePath best_zone_path(const std::vector<std::size_t>& members, const std::vector<std::size_t>& firsts,
                        const std::vector<std::size_t>& lasts, const RouteInstance& route,
                        const tsp::SolverOptions& solver = {});

// Depot, then each zone's path in `zone_order`, then depot again.
std::vector<std::size_t> complete_sequence(const std::vector<std::size_t>& zone_order, const ZoneInstance& instance,
                                           const RouteInstance& route, const CompletionOptions& opts = {});

// Per-zone paths chosen by complete_sequence, in zone order.
std::vector<ZonePath> zone_paths(const std::vector<std::size_t>& zone_order, const ZoneInstance& instance,
                                 const RouteInstance& route, const CompletionOptions& opts = {});

}  // namespace routeseq
