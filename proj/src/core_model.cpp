#include "routeseq/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "routeseq/error.hpp"

namespace routeseq {

void validate_route(const RouteInstance& route) {
  const std::size_t n = route.n_stops();
  const auto fail = [&](const std::string& msg) {
    throw MalformedRoute("route '" + route.route_id + "': " + msg);
  };
  if (route.travel_time.rows != n + 1 || route.travel_time.cols != n + 1) {
    fail("travel_time must be " + std::to_string(n + 1) + "x" + std::to_string(n + 1));
  }
  for (std::size_t a = 0; a <= n; ++a) {
    for (std::size_t b = 0; b <= n; ++b) {
      const double t = route.travel_time(a, b);
      if (!std::isfinite(t) || t < 0.0) fail("travel_time entries must be finite and >= 0");
      if (a == b && t != 0.0) fail("travel_time diagonal must be 0");
    }
  }
  for (const auto& s : route.stops) {
    if (s.zone_id.empty()) fail("stop '" + s.stop_id + "' has no zone_id");
    if (s.service_time < 0.0 || s.n_packages < 0.0) fail("stop '" + s.stop_id + "' has negative counts");
  }
  if (route.actual_stop_sequence.size() != n) fail("actual sequence length differs from stop count");
  std::vector<bool> seen(n + 1, false);
  for (std::size_t node : route.actual_stop_sequence) {
    if (node < 1 || node > n || seen[node]) fail("actual sequence is not a permutation of the stops");
    seen[node] = true;
  }
}

ZoneInstance build_zone_instance(const RouteInstance& route) {
  const std::size_t n = route.n_stops();
  if (route.travel_time.rows != n + 1 || route.travel_time.cols != n + 1) {
    throw MalformedRoute("route '" + route.route_id + "': travel_time dimension mismatch");
  }

  ZoneInstance inst;
  inst.zone_of_node.assign(n + 1, 0);

  // Zones are numbered by first appearance in the stop list; the ordering is
  // consistent, so shuffled stop lists give the same matrix up to relabeling.
  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& stop = route.stops[k];
    if (stop.zone_id.empty()) {
      throw MalformedRoute("route '" + route.route_id + "': stop '" + stop.stop_id + "' has no zone_id");
    }
    auto [it, inserted] = index_of.try_emplace(stop.zone_id, inst.zones.size());
    if (inserted) inst.zones.push_back(Zone{stop.zone_id, {}, 0.0, 0.0});
    inst.zones[it->second].member_stops.push_back(k + 1);
    inst.zone_of_node[k + 1] = it->second;
  }

  for (auto& z : inst.zones) {
    double lat = 0.0, lng = 0.0;
    for (std::size_t node : z.member_stops) {
      lat += route.stops[node - 1].lat;
      lng += route.stops[node - 1].lng;
    }
    z.centroid_lat = lat / static_cast<double>(z.member_stops.size());
    z.centroid_lng = lng / static_cast<double>(z.member_stops.size());
  }

  const std::size_t m = inst.zones.size();
  inst.zone_travel_time = Tensor(m + 1, m + 1);
  const auto members = [&](std::size_t zone_node) -> std::vector<std::size_t> {
    if (zone_node == 0) return {0};
    return inst.zones[zone_node - 1].member_stops;
  };
  for (std::size_t a = 0; a <= m; ++a) {
    const auto from = members(a);
    for (std::size_t b = 0; b <= m; ++b) {
      if (a == b) continue;
      const auto to = members(b);
      double sum = 0.0;
      for (std::size_t s : from)
        for (std::size_t t : to) sum += route.travel_time(s, t);
      inst.zone_travel_time(a, b) = sum / static_cast<double>(from.size() * to.size());
    }
  }

  inst.actual_zone_sequence = zone_order_of(inst, route.actual_stop_sequence);
  return inst;
}

std::vector<std::size_t> zone_order_of(const ZoneInstance& instance,
                                       const std::vector<std::size_t>& stop_sequence) {
  std::vector<std::size_t> order;
  std::vector<bool> seen(instance.n_zones(), false);
  for (std::size_t node : stop_sequence) {
    if (node == 0) continue;
    if (node >= instance.zone_of_node.size()) throw InvalidInput("stop index out of range");
    const std::size_t z = instance.zone_of_node[node];
    if (!seen[z]) {
      seen[z] = true;
      order.push_back(z);
    }
  }
  return order;
}

namespace {

// min, mean, max, population std over a set of times; zeros when empty.
void travel_summary(const std::vector<double>& times, double* out) {
  if (times.empty()) {
    std::fill(out, out + 4, 0.0);
    return;
  }
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  const double mean = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  var /= static_cast<double>(times.size());
  out[0] = *lo;
  out[1] = mean;
  out[2] = *hi;
  out[3] = std::sqrt(var);
}

}  // namespace

ZoneFeatures zone_features(std::size_t zone, const ZoneInstance& instance,
                           const RouteInstance& route) {
  if (zone >= instance.n_zones()) throw InvalidInput("zone index out of range");
  const Zone& z = instance.zones[zone];
  ZoneFeatures x(kZoneFeatureCount, 0.0);
  x[0] = z.centroid_lat;
  x[1] = z.centroid_lng;
  x[2] = static_cast<double>(z.member_stops.size());
  x[3] = 0.0;  // no map data
  for (std::size_t node : z.member_stops) {
    const auto& s = route.stops[node - 1];
    x[4] += s.n_packages;
    x[5] += s.service_time;
    x[6] += s.package_volume;
  }
  std::vector<double> outgoing;
  for (std::size_t other = 0; other < instance.n_zones(); ++other) {
    if (other != zone) outgoing.push_back(instance.zone_travel_time(zone + 1, other + 1));
  }
  travel_summary(outgoing, &x[7]);
  x[11] = instance.zone_travel_time(zone + 1, 0);
  return x;
}

ZoneFeatures depot_features(const ZoneInstance& instance, const RouteInstance& route) {
  ZoneFeatures x(kZoneFeatureCount, 0.0);
  x[0] = route.depot.lat;
  x[1] = route.depot.lng;
  std::vector<double> outgoing;
  for (std::size_t z = 0; z < instance.n_zones(); ++z) outgoing.push_back(instance.zone_travel_time(0, z + 1));
  travel_summary(outgoing, &x[7]);
  return x;
}

std::optional<ZoneCode> parse_zone_id(const std::string& id) {
  const auto dash = id.find('-');
  if (dash == std::string::npos || dash == 0) return std::nullopt;
  ZoneCode code;
  code.area = id.substr(0, dash);
  std::size_t pos = dash + 1;
  const auto read_int = [&](int& out) {
    const std::size_t start = pos;
    while (pos < id.size() && std::isdigit(static_cast<unsigned char>(id[pos]))) ++pos;
    if (pos == start || pos - start > 6) return false;
    out = std::stoi(id.substr(start, pos - start));
    return true;
  };
  if (!read_int(code.major)) return std::nullopt;
  if (pos >= id.size() || id[pos] != '.') return std::nullopt;
  ++pos;
  if (!read_int(code.minor)) return std::nullopt;
  if (pos + 1 != id.size() || !std::isalpha(static_cast<unsigned char>(id[pos]))) return std::nullopt;
  code.letter = static_cast<char>(std::toupper(static_cast<unsigned char>(id[pos])));
  return code;
}

PairFeatures relation_features(const std::string& from_id, const std::string& to_id,
                               double travel_time) {
  PairFeatures z(kPairFeatureCount, 0.0);
  z[0] = travel_time;
  const auto a = parse_zone_id(from_id);
  const auto b = parse_zone_id(to_id);
  if (!a || !b) return z;
  const bool same_area = a->area == b->area;
  const bool same_major = same_area && a->major == b->major;
  z[1] = same_area ? 1.0 : 0.0;
  z[2] = same_major ? 1.0 : 0.0;
  z[3] = (same_major && a->minor == b->minor) ? 1.0 : 0.0;
  z[4] = std::abs(a->minor - b->minor);
  z[5] = std::abs(static_cast<int>(a->letter) - static_cast<int>(b->letter));
  return z;
}

PairFeatures pair_features(std::size_t i, std::size_t j, const ZoneInstance& instance) {
  if (i >= instance.n_zones() || j >= instance.n_zones()) throw InvalidInput("zone index out of range");
  return relation_features(instance.zones[i].zone_id, instance.zones[j].zone_id,
                           instance.zone_travel_time(i + 1, j + 1));
}

PairFeatures depot_pair_features(std::size_t j, const ZoneInstance& instance) {
  if (j >= instance.n_zones()) throw InvalidInput("zone index out of range");
  PairFeatures z(kPairFeatureCount, 0.0);
  z[0] = instance.zone_travel_time(0, j + 1);
  return z;
}

}  // namespace routeseq
