#pragma once

// Synthetic delivery routes with a known driver behaviour.
//
// A dataset shares one city: zones are laid out hierarchically
// (area -> major cluster -> minor -> letter) and named
// `<area>-<major>.<minor><letter>`. Each route serves a compact block of
// zones around a random anchor. The driver's zone order follows the planted
// behaviour; inside each zone the stops are visited along the cheapest
// path, using the same expansion as stop completion.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "routeseq/core_model.hpp"

namespace routeseq::datagen {

enum class Behavior {
  tsp,             // planned zone tour
  nearest_zone,    // greedy nearest unvisited zone from the depot
  cluster_biased,  // stay in the current major cluster while possible, nearest first;
                   // starts from the zone whose rule-rollout has the lowest cost
};

std::string to_string(Behavior b);
Behavior parse_behavior(const std::string& s);

struct SynthConfig {
  std::size_t n_routes = 100;
  std::size_t zones_min = 5, zones_max = 15;
  std::size_t stops_min = 3, stops_max = 10;
  double city_km = 20.0;
  double speed_kmh = 30.0;
  double noise_sigma = 0.1;  // lognormal multiplicative noise per directed leg
  std::size_t areas = 3, majors = 4, minors = 3, letters = 3;
  Behavior behavior = Behavior::cluster_biased;
  std::uint64_t seed = 1;
};

void validate(const SynthConfig& cfg);

std::vector<RouteInstance> generate(const SynthConfig& cfg);

// Zone order a driver following `behavior` takes on `instance`.
std::vector<std::size_t> planted_zone_order(const ZoneInstance& instance, Behavior behavior);

// The cluster-biased rule rolled out from a given first zone.
std::vector<std::size_t> cluster_biased_rollout(const ZoneInstance& instance, std::size_t first);

}  // namespace routeseq::datagen
