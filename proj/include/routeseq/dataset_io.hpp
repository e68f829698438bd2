#pragma once

// Dataset wire format ("routeseq/1"):
//
// {
//   "version": "routeseq/1",
//   "routes": [{
//     "route_id": "R1_0",
//     "depot": {"id": "D", "lat": 42.3, "lng": -71.1},        // id optional
//     "stops": [{"id": "s1", "zone_id": "B-6.2C", "lat": .., "lng": ..,
//                "n_packages": 2, "service_time_s": 60, "volume_cm3": 3000}],
//     "travel_time_s": [ (n+1)^2 numbers, row-major, depot at index 0 ],
//     "actual_sequence": ["s3", "s1", ...],                   // stop ids
//     "metadata": {"station": "..", ...}                       // optional
//   }]
// }
//
// n_packages, service_time_s and volume_cm3 default to 0 when absent.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "routeseq/core_model.hpp"
#include "routeseq/scoring.hpp"

namespace routeseq::io {

inline constexpr const char* kDatasetVersion = "routeseq/1";

nlohmann::json routes_to_json(const std::vector<RouteInstance>& routes);
std::vector<RouteInstance> routes_from_json(const nlohmann::json& j);

void save_routes(const std::vector<RouteInstance>& routes, const std::filesystem::path& path);
std::vector<RouteInstance> load_routes(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Predictions wire format ("routeseq-predictions/1"): per route the zone ids
// in predicted order and, optionally, the full stop-id sequence.
inline constexpr const char* kPredictionsVersion = "routeseq-predictions/1";

struct RoutePrediction {
  std::string route_id;
  std::vector<std::string> zone_ids;
  std::optional<std::vector<std::string>> stop_ids;  // without depot
  std::optional<double> operational_cost;
};

nlohmann::json predictions_to_json(const std::vector<RoutePrediction>& predictions);
std::vector<RoutePrediction> predictions_from_json(const nlohmann::json& j);

// Map a prediction onto the route's zone and node indices.
scoring::Prediction resolve_prediction(const RoutePrediction& p, const RouteInstance& route,
                                       const ZoneInstance& zones);
RoutePrediction describe_prediction(const RouteInstance& route, const ZoneInstance& zones,
                                    const std::vector<std::size_t>& zone_order,
                                    const std::optional<std::vector<std::size_t>>& stop_nodes,
                                    std::optional<double> operational_cost);

nlohmann::json report_to_json(const scoring::DisparityReport& report);
std::string report_csv(const scoring::DisparityReport& report);

}  // namespace routeseq::io
