#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "routeseq/tensor.hpp"

namespace routeseq {

struct StopRecord {
  std::string stop_id;
  std::string zone_id;  // empty for the depot
  double lat = 0.0;
  double lng = 0.0;
  double n_packages = 0.0;
  double service_time = 0.0;    // seconds
  double package_volume = 0.0;  // cubic centimetres

  friend bool operator==(const StopRecord&, const StopRecord&) = default;
};

// Node indexing convention used throughout: node 0 is the depot and node k
// (k >= 1) is stops[k - 1]. `travel_time` is indexed by node.
struct RouteInstance {
  std::string route_id;
  StopRecord depot;
  std::vector<StopRecord> stops;
  Tensor travel_time;                        // seconds, (n+1) x (n+1)
  std::vector<std::size_t> actual_stop_sequence;  // permutation of 1..n
  std::map<std::string, std::string> metadata;

  std::size_t n_stops() const noexcept { return stops.size(); }
  std::size_t n_nodes() const noexcept { return stops.size() + 1; }

  friend bool operator==(const RouteInstance&, const RouteInstance&) = default;
};

// Throws MalformedRoute describing the first violated invariant.
void validate_route(const RouteInstance& route);

struct Zone {
  std::string zone_id;
  std::vector<std::size_t> member_stops;  // node indices
  double centroid_lat = 0.0;
  double centroid_lng = 0.0;
};

// Zone-level view of a route. Node 0 of `zone_travel_time` is the depot and
// node z + 1 is zones[z].
struct ZoneInstance {
  std::vector<Zone> zones;
  Tensor zone_travel_time;
  std::vector<std::size_t> actual_zone_sequence;  // zone indices (0-based)
  std::vector<std::size_t> zone_of_node;          // node -> zone index; unused for node 0

  std::size_t n_zones() const noexcept { return zones.size(); }
};

ZoneInstance build_zone_instance(const RouteInstance& route);

// Derive a zone order from a stop sequence by first visit.
std::vector<std::size_t> zone_order_of(const ZoneInstance& instance,
                                       const std::vector<std::size_t>& stop_sequence);

// Fixed-width zone descriptor. Layout (K = kZoneFeatureCount):
//   0 centroid lat, 1 centroid lng, 2 n_stops, 3 n_intersections,
//   4 n_packages, 5 total service time, 6 total package volume,
//   7..10 min/mean/max/std of outgoing zone-to-zone travel times,
//   11 travel time to the depot.
inline constexpr std::size_t kZoneFeatureCount = 12;
using ZoneFeatures = std::vector<double>;

ZoneFeatures zone_features(std::size_t zone, const ZoneInstance& instance,
                           const RouteInstance& route);

// Depot descriptor: depot coordinates, zero package/service entries, summary of
// depot-to-zone travel times and zero travel time to itself.
ZoneFeatures depot_features(const ZoneInstance& instance, const RouteInstance& route);

// Parsed `<area>-<major>.<minor><letter>` zone identifier, e.g. "B-6.2C".
struct ZoneCode {
  std::string area;
  int major = 0;
  int minor = 0;
  char letter = 'A';
};

std::optional<ZoneCode> parse_zone_id(const std::string& zone_id);

// Directed pair descriptor. Layout (P = kPairFeatureCount):
//   0 travel time, 1 same area, 2 same major cluster, 3 same minor,
//   4 |minor difference|, 5 |letter distance|.
inline constexpr std::size_t kPairFeatureCount = 6;
using PairFeatures = std::vector<double>;

// Relationship features from zone ids alone; zeros when either id fails to parse.
PairFeatures relation_features(const std::string& from_id, const std::string& to_id,
                               double travel_time);

// Pair features for zone i -> zone j of the instance.
PairFeatures pair_features(std::size_t i, std::size_t j, const ZoneInstance& instance);

// Pair features for depot -> zone j (relationship entries are zero).
PairFeatures depot_pair_features(std::size_t j, const ZoneInstance& instance);

}  // namespace routeseq
