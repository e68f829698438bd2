#include "routeseq/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "routeseq/error.hpp"
#include "routeseq/inference.hpp"
#include "routeseq/stop_completion.hpp"
#include "routeseq/tsp.hpp"

namespace routeseq::datagen {

std::string to_string(Behavior b) {
  switch (b) {
    case Behavior::tsp: return "tsp";
    case Behavior::nearest_zone: return "nearest_zone";
    case Behavior::cluster_biased: return "cluster_biased";
  }
  return "unknown";
}

Behavior parse_behavior(const std::string& s) {
  if (s == "tsp") return Behavior::tsp;
  if (s == "nearest_zone") return Behavior::nearest_zone;
  if (s == "cluster_biased") return Behavior::cluster_biased;
  throw ConfigError("unknown behavior '" + s + "' (tsp|nearest_zone|cluster_biased)");
}

void validate(const SynthConfig& c) {
  if (c.n_routes == 0) throw InvalidInput("n_routes must be positive");
  if (c.zones_min == 0 || c.zones_min > c.zones_max) throw InvalidInput("zones per route range is empty");
  if (c.stops_min == 0 || c.stops_min > c.stops_max) throw InvalidInput("stops per zone range is empty");
  if (!(c.speed_kmh > 0.0)) throw InvalidInput("speed must be positive");
  if (!(c.city_km > 0.0)) throw InvalidInput("city extent must be positive");
  if (c.noise_sigma < 0.0) throw InvalidInput("noise sigma must be non-negative");
  if (c.areas == 0 || c.areas > 26 || c.majors == 0 || c.minors == 0 || c.letters == 0 || c.letters > 26)
    throw InvalidInput("zone hierarchy sizes out of range");
  if (c.zones_max > c.areas * c.majors * c.minors * c.letters)
    throw InvalidInput("zones_max exceeds the number of zones in the city");
}

namespace {

struct CityZone {
  std::string id;
  double x = 0.0, y = 0.0;  // km
};

struct City {
  std::vector<CityZone> zones;
  double depot_x = 0.0, depot_y = 0.0;
};

City make_city(const SynthConfig& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto jitter = [&](double radius) {
    const double r = radius * std::sqrt(unit(rng));
    const double t = 2.0 * M_PI * unit(rng);
    return std::pair{r * std::cos(t), r * std::sin(t)};
  };
  City city;
  const double L = c.city_km;
  city.depot_x = -0.15 * L;
  city.depot_y = 0.5 * L;
  for (std::size_t a = 0; a < c.areas; ++a) {
    const double ax = L * (0.2 + 0.6 * unit(rng));
    const double ay = L * (0.2 + 0.6 * unit(rng));
    for (std::size_t M = 0; M < c.majors; ++M) {
      const auto [mx, my] = jitter(0.15 * L);
      for (std::size_t m = 0; m < c.minors; ++m) {
        const auto [nx, ny] = jitter(0.05 * L);
        for (std::size_t l = 0; l < c.letters; ++l) {
          const auto [lx, ly] = jitter(0.02 * L);
          CityZone z;
          z.id = std::string(1, static_cast<char>('A' + a)) + "-" + std::to_string(M + 1) + "." +
                 std::to_string(m + 1) + static_cast<char>('A' + l);
          z.x = ax + mx + nx + lx;
          z.y = ay + my + ny + ly;
          city.zones.push_back(std::move(z));
        }
      }
    }
  }
  return city;
}

constexpr double kLat0 = 42.36;
constexpr double kLng0 = -71.06;

double to_lat(double y_km) { return kLat0 + y_km / 111.0; }
double to_lng(double x_km) { return kLng0 + x_km / (111.0 * std::cos(kLat0 * M_PI / 180.0)); }

std::size_t nearest_unvisited(const ZoneInstance& inst, std::size_t from_node, const std::vector<bool>& visited,
                              const std::vector<std::size_t>& pool) {
  std::size_t best = inst.n_zones();
  for (std::size_t z : pool) {
    if (visited[z]) continue;
    if (best == inst.n_zones() || inst.zone_travel_time(from_node, z + 1) < inst.zone_travel_time(from_node, best + 1))
      best = z;
  }
  return best;
}

}  // namespace

std::vector<std::size_t> cluster_biased_rollout(const ZoneInstance& inst, std::size_t first) {
  const std::size_t n = inst.n_zones();
  std::vector<std::optional<ZoneCode>> codes;
  for (const auto& z : inst.zones) codes.push_back(parse_zone_id(z.zone_id));
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<bool> visited(n, false);
  std::vector<std::size_t> order{first};
  visited[first] = true;
  while (order.size() < n) {
    const std::size_t cur = order.back();
    std::vector<std::size_t> same;
    for (std::size_t z = 0; z < n; ++z) {
      if (visited[z] || !codes[cur] || !codes[z]) continue;
      if (codes[z]->area == codes[cur]->area && codes[z]->major == codes[cur]->major) same.push_back(z);
    }
    const std::size_t next = nearest_unvisited(inst, cur + 1, visited, same.empty() ? all : same);
    visited[next] = true;
    order.push_back(next);
  }
  return order;
}

std::vector<std::size_t> planted_zone_order(const ZoneInstance& inst, Behavior behavior) {
  const std::size_t n = inst.n_zones();
  switch (behavior) {
    case Behavior::tsp: {
      std::vector<std::size_t> order;
      for (std::size_t node : tsp::solve_tour(inst.zone_travel_time, 0).order)
        if (node != 0) order.push_back(node - 1);
      return order;
    }
    case Behavior::nearest_zone: {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      std::vector<bool> visited(n, false);
      std::vector<std::size_t> order;
      std::size_t from = 0;
      while (order.size() < n) {
        const std::size_t z = nearest_unvisited(inst, from, visited, all);
        visited[z] = true;
        order.push_back(z);
        from = z + 1;
      }
      return order;
    }
    case Behavior::cluster_biased: {
      std::vector<std::size_t> best;
      double best_cost = 0.0;
      for (std::size_t f = 0; f < n; ++f) {
        auto order = cluster_biased_rollout(inst, f);
        const double c = operational_cost(order, inst);
        if (best.empty() || c < best_cost) {
          best = std::move(order);
          best_cost = c;
        }
      }
      return best;
    }
  }
  return {};
}

std::vector<RouteInstance> generate(const SynthConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  const City city = make_city(cfg, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto uniform_int = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(unit(rng) * static_cast<double>(hi - lo + 1)) % (hi - lo + 1);
  };

  std::vector<RouteInstance> routes;
  routes.reserve(cfg.n_routes);
  for (std::size_t r = 0; r < cfg.n_routes; ++r) {
    RouteInstance route;
    route.route_id = "R" + std::to_string(cfg.seed) + "_" + std::to_string(r);

    // A compact block of zones around a random anchor.
    const std::size_t anchor = uniform_int(0, city.zones.size() - 1);
    const std::size_t n_zones = uniform_int(cfg.zones_min, cfg.zones_max);
    std::vector<std::size_t> by_distance(city.zones.size());
    std::iota(by_distance.begin(), by_distance.end(), 0);
    const auto dist2 = [&](std::size_t z) {
      const double dx = city.zones[z].x - city.zones[anchor].x, dy = city.zones[z].y - city.zones[anchor].y;
      return dx * dx + dy * dy;
    };
    std::stable_sort(by_distance.begin(), by_distance.end(),
                     [&](std::size_t a, std::size_t b) { return dist2(a) < dist2(b); });

    std::vector<std::pair<double, double>> xy{{city.depot_x, city.depot_y}};
    route.depot = StopRecord{"D", "", to_lat(city.depot_y), to_lng(city.depot_x), 0, 0, 0};
    std::vector<StopRecord> stops;
    std::vector<std::pair<double, double>> stop_xy;
    for (std::size_t k = 0; k < n_zones; ++k) {
      const CityZone& z = city.zones[by_distance[k]];
      const std::size_t count = uniform_int(cfg.stops_min, cfg.stops_max);
      for (std::size_t s = 0; s < count; ++s) {
        const double x = z.x + 0.12 * gauss(rng), y = z.y + 0.12 * gauss(rng);
        StopRecord rec;
        rec.zone_id = z.id;
        rec.lat = to_lat(y);
        rec.lng = to_lng(x);
        rec.n_packages = static_cast<double>(uniform_int(1, 4));
        rec.service_time = std::round(30.0 + 170.0 * unit(rng));
        rec.package_volume = std::round(2000.0 + 30000.0 * unit(rng) * rec.n_packages);
        stops.push_back(std::move(rec));
        stop_xy.emplace_back(x, y);
      }
    }
    // Stop listing order carries no information about the visit order.
    std::vector<std::size_t> perm(stops.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < perm.size(); ++k) {
      StopRecord rec = stops[perm[k]];
      rec.stop_id = route.route_id + "_S" + std::to_string(k + 1);
      route.stops.push_back(std::move(rec));
      xy.push_back(stop_xy[perm[k]]);
    }

    const std::size_t nodes = route.n_nodes();
    route.travel_time = Tensor(nodes, nodes);
    const double seconds_per_km = 3600.0 / cfg.speed_kmh;
    for (std::size_t a = 0; a < nodes; ++a) {
      for (std::size_t b = 0; b < nodes; ++b) {
        if (a == b) continue;
        const double dx = xy[a].first - xy[b].first, dy = xy[a].second - xy[b].second;
        const double km = std::sqrt(dx * dx + dy * dy) + 0.01;
        const double noise = std::exp(cfg.noise_sigma * gauss(rng));
        route.travel_time(a, b) = std::round(10.0 * km * seconds_per_km * noise) / 10.0 + 0.1;
      }
    }

    route.metadata["station"] = "STN1";
    char departure[32];
    std::snprintf(departure, sizeof departure, "2026-07-%02zuT%02zu:00:00", 1 + r % 28, 7 + r % 3);
    route.metadata["departure_time"] = departure;
    route.metadata["vehicle_capacity"] = "3313071.0";
    route.metadata["quality_label"] = "High";
    route.metadata["behavior"] = to_string(cfg.behavior);

    // Placeholder so zone grouping can run; replaced by the planted order.
    route.actual_stop_sequence.resize(route.n_stops());
    std::iota(route.actual_stop_sequence.begin(), route.actual_stop_sequence.end(), 1);
    const ZoneInstance inst = build_zone_instance(route);
    const auto zone_order = planted_zone_order(inst, cfg.behavior);
    const auto full = complete_sequence(zone_order, inst, route);
    route.actual_stop_sequence.assign(full.begin() + 1, full.end() - 1);
    routes.push_back(std::move(route));
  }
  return routes;
}

}  // namespace routeseq::datagen
