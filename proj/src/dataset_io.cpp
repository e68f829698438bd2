#include "routeseq/dataset_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "routeseq/error.hpp"

namespace routeseq::io {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(path + "/" + key, "missing field");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

double optional_number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) return 0.0;
  return number(obj.at(key), path + "/" + key);
}

}  // namespace

json routes_to_json(const std::vector<RouteInstance>& routes) {
  json out;
  out["version"] = kDatasetVersion;
  json arr = json::array();
  for (const auto& r : routes) {
    json jr;
    jr["route_id"] = r.route_id;
    jr["depot"] = {{"id", r.depot.stop_id}, {"lat", r.depot.lat}, {"lng", r.depot.lng}};
    json stops = json::array();
    for (const auto& s : r.stops) {
      stops.push_back({{"id", s.stop_id}, {"zone_id", s.zone_id}, {"lat", s.lat}, {"lng", s.lng},
                       {"n_packages", s.n_packages}, {"service_time_s", s.service_time},
                       {"volume_cm3", s.package_volume}});
    }
    jr["stops"] = std::move(stops);
    jr["travel_time_s"] = r.travel_time.data;
    json seq = json::array();
    for (std::size_t node : r.actual_stop_sequence) seq.push_back(r.stops.at(node - 1).stop_id);
    jr["actual_sequence"] = std::move(seq);
    jr["metadata"] = r.metadata;
    arr.push_back(std::move(jr));
  }
  out["routes"] = std::move(arr);
  return out;
}

std::vector<RouteInstance> routes_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("", "dataset must be a JSON object");
  if (text(require(j, "version", ""), "/version") != kDatasetVersion)
    throw ParseError("/version", "unsupported dataset version");
  const json& arr = require(j, "routes", "");
  if (!arr.is_array()) throw ParseError("/routes", "expected an array");

  std::vector<RouteInstance> routes;
  for (std::size_t r = 0; r < arr.size(); ++r) {
    const std::string path = "/routes/" + std::to_string(r);
    const json& jr = arr[r];
    RouteInstance route;
    route.route_id = text(require(jr, "route_id", path), path + "/route_id");

    const json& jd = require(jr, "depot", path);
    route.depot.stop_id = jd.contains("id") ? text(jd.at("id"), path + "/depot/id") : "depot";
    route.depot.lat = number(require(jd, "lat", path + "/depot"), path + "/depot/lat");
    route.depot.lng = number(require(jd, "lng", path + "/depot"), path + "/depot/lng");

    const json& js = require(jr, "stops", path);
    if (!js.is_array()) throw ParseError(path + "/stops", "expected an array");
    std::unordered_map<std::string, std::size_t> node_of;
    for (std::size_t k = 0; k < js.size(); ++k) {
      const std::string sp = path + "/stops/" + std::to_string(k);
      const json& s = js[k];
      StopRecord rec;
      rec.stop_id = text(require(s, "id", sp), sp + "/id");
      rec.zone_id = text(require(s, "zone_id", sp), sp + "/zone_id");
      rec.lat = number(require(s, "lat", sp), sp + "/lat");
      rec.lng = number(require(s, "lng", sp), sp + "/lng");
      rec.n_packages = optional_number(s, "n_packages", sp);
      rec.service_time = optional_number(s, "service_time_s", sp);
      rec.package_volume = optional_number(s, "volume_cm3", sp);
      if (!node_of.emplace(rec.stop_id, k + 1).second) throw ParseError(sp + "/id", "duplicate stop id");
      route.stops.push_back(std::move(rec));
    }

    const std::size_t nodes = route.n_nodes();
    const json& jt = require(jr, "travel_time_s", path);
    if (!jt.is_array() || jt.size() != nodes * nodes) {
      throw ParseError(path + "/travel_time_s", "route '" + route.route_id + "': travel time matrix must have " +
                                                    std::to_string(nodes * nodes) + " entries");
    }
    route.travel_time = Tensor(nodes, nodes);
    for (std::size_t e = 0; e < jt.size(); ++e) route.travel_time.data[e] = number(jt[e], path + "/travel_time_s/" + std::to_string(e));

    const json& ja = require(jr, "actual_sequence", path);
    if (!ja.is_array()) throw ParseError(path + "/actual_sequence", "expected an array");
    for (std::size_t k = 0; k < ja.size(); ++k) {
      const std::string id = text(ja[k], path + "/actual_sequence/" + std::to_string(k));
      const auto it = node_of.find(id);
      if (it == node_of.end()) throw ParseError(path + "/actual_sequence/" + std::to_string(k), "unknown stop id '" + id + "'");
      route.actual_stop_sequence.push_back(it->second);
    }

    if (jr.contains("metadata")) {
      const json& jm = jr.at("metadata");
      if (!jm.is_object()) throw ParseError(path + "/metadata", "expected an object");
      for (auto it = jm.begin(); it != jm.end(); ++it)
        route.metadata[it.key()] = it->is_string() ? it->get<std::string>() : it->dump();
    }
    try {
      validate_route(route);
    } catch (const MalformedRoute& e) {
      throw ParseError(path, e.what());
    }
    routes.push_back(std::move(route));
  }
  return routes;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << content;
  if (!content.empty() && content.back() != '\n') out << '\n';
}

void save_routes(const std::vector<RouteInstance>& routes, const std::filesystem::path& path) {
  write_text_file(path, routes_to_json(routes).dump());
}

std::vector<RouteInstance> load_routes(const std::filesystem::path& path) { return routes_from_json(read_json_file(path)); }

json predictions_to_json(const std::vector<RoutePrediction>& predictions) {
  json out;
  out["version"] = kPredictionsVersion;
  json arr = json::array();
  for (const auto& p : predictions) {
    json jp;
    jp["route_id"] = p.route_id;
    jp["zone_order"] = p.zone_ids;
    if (p.stop_ids) jp["stop_sequence"] = *p.stop_ids;
    if (p.operational_cost) jp["operational_cost"] = *p.operational_cost;
    arr.push_back(std::move(jp));
  }
  out["routes"] = std::move(arr);
  return out;
}

std::vector<RoutePrediction> predictions_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("", "predictions must be a JSON object");
  if (text(require(j, "version", ""), "/version") != kPredictionsVersion)
    throw ParseError("/version", "unsupported predictions version");
  const json& arr = require(j, "routes", "");
  if (!arr.is_array()) throw ParseError("/routes", "expected an array");
  std::vector<RoutePrediction> out;
  for (std::size_t r = 0; r < arr.size(); ++r) {
    const std::string path = "/routes/" + std::to_string(r);
    const json& jp = arr[r];
    RoutePrediction p;
    p.route_id = text(require(jp, "route_id", path), path + "/route_id");
    const json& jz = require(jp, "zone_order", path);
    if (!jz.is_array()) throw ParseError(path + "/zone_order", "expected an array");
    for (std::size_t k = 0; k < jz.size(); ++k) p.zone_ids.push_back(text(jz[k], path + "/zone_order/" + std::to_string(k)));
    if (jp.contains("stop_sequence")) {
      const json& js = jp.at("stop_sequence");
      if (!js.is_array()) throw ParseError(path + "/stop_sequence", "expected an array");
      std::vector<std::string> ids;
      for (std::size_t k = 0; k < js.size(); ++k) ids.push_back(text(js[k], path + "/stop_sequence/" + std::to_string(k)));
      p.stop_ids = std::move(ids);
    }
    if (jp.contains("operational_cost")) p.operational_cost = number(jp.at("operational_cost"), path + "/operational_cost");
    out.push_back(std::move(p));
  }
  return out;
}

scoring::Prediction resolve_prediction(const RoutePrediction& p, const RouteInstance& route, const ZoneInstance& zones) {
  std::unordered_map<std::string, std::size_t> zone_index;
  for (std::size_t z = 0; z < zones.n_zones(); ++z) zone_index.emplace(zones.zones[z].zone_id, z);
  scoring::Prediction out;
  for (const auto& id : p.zone_ids) {
    const auto it = zone_index.find(id);
    if (it == zone_index.end())
      throw InvalidInput("route '" + route.route_id + "': predicted zone '" + id + "' is not on the route");
    out.zone_order.push_back(it->second);
  }
  if (p.stop_ids) {
    std::unordered_map<std::string, std::size_t> node_of;
    for (std::size_t k = 0; k < route.stops.size(); ++k) node_of.emplace(route.stops[k].stop_id, k + 1);
    scoring::Sequence nodes;
    for (const auto& id : *p.stop_ids) {
      const auto it = node_of.find(id);
      if (it == node_of.end())
        throw InvalidInput("route '" + route.route_id + "': predicted stop '" + id + "' is not on the route");
      nodes.push_back(it->second);
    }
    out.stop_sequence = std::move(nodes);
  }
  return out;
}

RoutePrediction describe_prediction(const RouteInstance& route, const ZoneInstance& zones,
                                    const std::vector<std::size_t>& zone_order,
                                    const std::optional<std::vector<std::size_t>>& stop_nodes,
                                    std::optional<double> operational_cost) {
  RoutePrediction p;
  p.route_id = route.route_id;
  for (std::size_t z : zone_order) p.zone_ids.push_back(zones.zones.at(z).zone_id);
  if (stop_nodes) {
    std::vector<std::string> ids;
    for (std::size_t node : *stop_nodes)
      if (node != 0) ids.push_back(route.stops.at(node - 1).stop_id);
    p.stop_ids = std::move(ids);
  }
  p.operational_cost = operational_cost;
  return p;
}

json report_to_json(const scoring::DisparityReport& r) {
  json j;
  j["n_routes"] = r.routes.size();
  j["n_failures"] = r.failures.size();
  j["k"] = r.k;
  j["mean_disparity"] = r.mean_disparity;
  j["std_disparity"] = r.std_disparity;
  j["median_disparity"] = r.median_disparity;
  j["accuracy"] = r.accuracy;
  j["mean_operational_cost"] = r.mean_operational_cost;
  json routes = json::array();
  for (const auto& s : r.routes) {
    routes.push_back({{"route_id", s.route_id}, {"disparity", s.disparity}, {"sd", s.sd}, {"erp_norm", s.erp_norm},
                      {"erp_edits", s.erp_edits}, {"first_k", s.first_k}, {"operational_cost", s.operational_cost}});
  }
  j["routes"] = std::move(routes);
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"route_id", f.route_id}, {"message", f.message}});
  j["failures"] = std::move(failures);
  return j;
}

std::string report_csv(const scoring::DisparityReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "route_id,disparity,sd,erp_norm,erp_edits,operational_cost";
  for (std::size_t k = 1; k <= r.k; ++k) out << ",zone" << k << "_hit";
  out << '\n';
  for (const auto& s : r.routes) {
    out << s.route_id << ',' << s.disparity << ',' << s.sd << ',' << s.erp_norm << ',' << s.erp_edits << ','
        << s.operational_cost;
    for (int hit : s.first_k) out << ',' << hit;
    out << '\n';
  }
  return out.str();
}

}  // namespace routeseq::io
