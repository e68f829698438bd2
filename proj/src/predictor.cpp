#include "routeseq/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "routeseq/error.hpp"
#include "routeseq/tsp.hpp"

namespace routeseq {

using nlohmann::json;

std::string to_string(InputOrder o) { return o == InputOrder::tsp ? "tsp" : "random"; }

InputOrder parse_input_order(const std::string& s) {
  if (s == "tsp") return InputOrder::tsp;
  if (s == "random") return InputOrder::random;
  throw ConfigError("unknown input order '" + s + "' (tsp|random)");
}

void FeatureScaler::apply_zone(std::span<double> x) const {
  if (empty()) return;
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = (x[k] - zone_mean[k]) / zone_scale[k];
}

void FeatureScaler::apply_pair(std::span<double> z) const {
  if (pair_mean.empty()) return;
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = (z[k] - pair_mean[k]) / pair_scale[k];
}

void ZoneVocabulary::add(const std::string& id) {
  if (index.count(id)) return;
  ids.push_back(id);
  index.emplace(id, ids.size());
}

std::size_t ZoneVocabulary::class_of(const std::string& id) const {
  const auto it = index.find(id);
  return it == index.end() ? 0 : it->second;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

RouteView make_route_view(const RouteInstance& route) {
  RouteView view;
  view.route = &route;
  view.zones = build_zone_instance(route);
  const std::size_t n = view.zones.n_zones();
  for (std::size_t z = 0; z < n; ++z) view.zone_x.push_back(zone_features(z, view.zones, route));
  view.depot_x = depot_features(view.zones, route);
  view.pairs.reserve((n + 1) * n);
  for (std::size_t j = 0; j < n; ++j) view.pairs.push_back(depot_pair_features(j, view.zones));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) view.pairs.push_back(pair_features(i, j, view.zones));

  const auto planned = tsp::solve_tour(view.zones.zone_travel_time, 0);
  for (std::size_t node : planned.order)
    if (node != 0) view.tsp_order.push_back(node - 1);
  return view;
}

namespace {

void fit_columns(const std::vector<std::span<const double>>& rows, std::size_t width, Vector& mean, Vector& scale) {
  mean.assign(width, 0.0);
  scale.assign(width, 1.0);
  if (rows.empty()) return;
  for (const auto& r : rows)
    for (std::size_t k = 0; k < width; ++k) mean[k] += r[k];
  for (double& m : mean) m /= static_cast<double>(rows.size());
  Vector var(width, 0.0);
  for (const auto& r : rows)
    for (std::size_t k = 0; k < width; ++k) var[k] += (r[k] - mean[k]) * (r[k] - mean[k]);
  for (std::size_t k = 0; k < width; ++k) {
    const double sd = std::sqrt(var[k] / static_cast<double>(rows.size()));
    scale[k] = sd > 1e-12 ? sd : 1.0;
  }
}

}  // namespace

FeatureScaler fit_scaler(const std::vector<RouteView>& views) {
  std::vector<std::span<const double>> zone_rows, pair_rows;
  for (const auto& v : views) {
    zone_rows.emplace_back(v.depot_x);
    for (const auto& x : v.zone_x) zone_rows.emplace_back(x);
    for (const auto& z : v.pairs) pair_rows.emplace_back(z);
  }
  FeatureScaler s;
  fit_columns(zone_rows, kZoneFeatureCount, s.zone_mean, s.zone_scale);
  fit_columns(pair_rows, kPairFeatureCount, s.pair_mean, s.pair_scale);
  return s;
}

ZoneVocabulary build_vocabulary(const std::vector<RouteView>& views) {
  std::vector<std::string> ids;
  for (const auto& v : views)
    for (const auto& z : v.zones.zones) ids.push_back(z.zone_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  ZoneVocabulary vocab;
  for (const auto& id : ids) vocab.add(id);
  return vocab;
}

std::vector<std::size_t> input_order_for(const RouteView& view, InputOrder order, std::uint64_t seed) {
  if (order == InputOrder::tsp) return view.tsp_order;
  std::vector<std::size_t> perm(view.zones.n_zones());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed ^ fnv1a(view.route->route_id));
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

model::ModelInput make_model_input(const RouteView& view, const RouteModel& m) {
  const std::size_t n = view.zones.n_zones();
  model::ModelInput in;
  in.n = n;
  in.zone_x = Tensor(n, kZoneFeatureCount);
  for (std::size_t z = 0; z < n; ++z) {
    auto row = in.zone_x.row(z);
    std::copy(view.zone_x[z].begin(), view.zone_x[z].end(), row.begin());
    m.scaler.apply_zone(row);
  }
  in.depot_x = view.depot_x;
  m.scaler.apply_zone(in.depot_x);
  in.pair = Tensor((n + 1) * n, kPairFeatureCount);
  for (std::size_t r = 0; r < view.pairs.size(); ++r) {
    auto row = in.pair.row(r);
    std::copy(view.pairs[r].begin(), view.pairs[r].end(), row.begin());
    m.scaler.apply_pair(row);
  }
  in.input_order = input_order_for(view, m.input_order, m.order_seed);
  if (m.params.variant == model::Variant::lstm_ed) {
    for (const auto& z : view.zones.zones) in.zone_class.push_back(m.vocabulary.class_of(z.zone_id));
  }
  return in;
}

// ---------------------------------------------------------------------------
// Checkpoint

namespace {

constexpr const char* kCheckpointFormat = "routeseq-checkpoint/1";

template <class T>
T get_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ParseError(path + "/" + key, "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(path + "/" + key, e.what());
  }
}

}  // namespace

std::string checkpoint_json(const RouteModel& m) {
  json j;
  j["format"] = kCheckpointFormat;
  j["variant"] = model::to_string(m.params.variant);
  const auto& d = m.params.dims;
  j["dims"] = {{"zone_features", d.zone_features}, {"pair_features", d.pair_features}, {"hidden", d.hidden},
               {"pointer_hidden", d.pointer_hidden}, {"mlp_hidden", d.mlp_hidden}, {"n_classes", d.n_classes}};
  j["input_order"] = to_string(m.input_order);
  j["order_seed"] = m.order_seed;
  j["scaler"] = {{"zone_mean", m.scaler.zone_mean}, {"zone_scale", m.scaler.zone_scale},
                 {"pair_mean", m.scaler.pair_mean}, {"pair_scale", m.scaler.pair_scale}};
  j["vocabulary"] = m.vocabulary.ids;
  json tensors = json::array();
  m.params.visit([&](const std::string& name, const Tensor& t) {
    tensors.push_back({{"name", name}, {"shape", {t.rows, t.cols}}, {"data", t.data}});
  });
  j["tensors"] = std::move(tensors);
  return j.dump();
}

RouteModel checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  if (get_field<std::string>(j, "format", "") != kCheckpointFormat)
    throw ParseError("/format", "unsupported checkpoint format");

  RouteModel m;
  const auto variant = model::parse_variant(get_field<std::string>(j, "variant", ""));
  const json& jd = j.at("dims");
  model::ModelDims dims;
  dims.zone_features = get_field<std::size_t>(jd, "zone_features", "/dims");
  dims.pair_features = get_field<std::size_t>(jd, "pair_features", "/dims");
  dims.hidden = get_field<std::size_t>(jd, "hidden", "/dims");
  dims.pointer_hidden = get_field<std::size_t>(jd, "pointer_hidden", "/dims");
  dims.mlp_hidden = get_field<std::vector<std::size_t>>(jd, "mlp_hidden", "/dims");
  dims.n_classes = get_field<std::size_t>(jd, "n_classes", "/dims");
  m.params = model::ModelParams::zeros(variant, dims);
  m.input_order = parse_input_order(get_field<std::string>(j, "input_order", ""));
  m.order_seed = get_field<std::uint64_t>(j, "order_seed", "");
  const json& js = j.at("scaler");
  m.scaler.zone_mean = get_field<Vector>(js, "zone_mean", "/scaler");
  m.scaler.zone_scale = get_field<Vector>(js, "zone_scale", "/scaler");
  m.scaler.pair_mean = get_field<Vector>(js, "pair_mean", "/scaler");
  m.scaler.pair_scale = get_field<Vector>(js, "pair_scale", "/scaler");
  for (const auto& id : get_field<std::vector<std::string>>(j, "vocabulary", "")) m.vocabulary.add(id);

  std::unordered_map<std::string, const json*> by_name;
  const json& jt = j.at("tensors");
  for (const auto& t : jt) by_name[t.at("name").get<std::string>()] = &t;
  m.params.visit([&](const std::string& name, Tensor& t) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError("/tensors", "missing tensor '" + name + "'");
    const json& e = *it->second;
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != t.rows || shape[1] != t.cols)
      throw ParseError("/tensors/" + name, "shape does not match the declared dimensions");
    t.data = e.at("data").get<std::vector<double>>();
    if (t.data.size() != t.rows * t.cols) throw ParseError("/tensors/" + name, "data length mismatch");
  });
  return m;
}

void save_checkpoint(const RouteModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_json(m) << '\n';
}

RouteModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read checkpoint '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace routeseq
