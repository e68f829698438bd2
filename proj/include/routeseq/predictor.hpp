#pragma once

// A trained sequence model plus everything needed to turn a raw route into
// model input: feature standardization, the zone-id vocabulary and the
// encoder input-order policy. This is the unit stored in a checkpoint.

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "routeseq/core_model.hpp"
#include "routeseq/model.hpp"

namespace routeseq {

enum class InputOrder { tsp, random };
std::string to_string(InputOrder o);
InputOrder parse_input_order(const std::string& s);

// Per-column affine standardization, fitted on training routes.
struct FeatureScaler {
  Vector zone_mean, zone_scale;
  Vector pair_mean, pair_scale;

  void apply_zone(std::span<double> x) const;
  void apply_pair(std::span<double> z) const;
  bool empty() const { return zone_mean.empty(); }
};

struct ZoneVocabulary {
  std::vector<std::string> ids;  // ids[c - 1] is class c; class 0 = unseen
  std::unordered_map<std::string, std::size_t> index;

  void add(const std::string& id);
  std::size_t class_of(const std::string& id) const;
  std::size_t size() const { return ids.size() + 1; }
};

// A route expanded into its zone view, raw features and pair features.
struct RouteView {
  const RouteInstance* route = nullptr;
  ZoneInstance zones;
  std::vector<ZoneFeatures> zone_x;  // raw, per zone
  ZoneFeatures depot_x;
  std::vector<PairFeatures> pairs;   // (n+1)*n, row from*n + j
  std::vector<std::size_t> tsp_order;  // planned zone order (zone indices)
};

RouteView make_route_view(const RouteInstance& route);

FeatureScaler fit_scaler(const std::vector<RouteView>& views);
ZoneVocabulary build_vocabulary(const std::vector<RouteView>& views);

struct RouteModel {
  model::ModelParams params;
  FeatureScaler scaler;
  ZoneVocabulary vocabulary;
  InputOrder input_order = InputOrder::tsp;
  std::uint64_t order_seed = 0;  // seeds random input orders per route
};

// Encoder reading order for a route under the model's policy.
std::vector<std::size_t> input_order_for(const RouteView& view, InputOrder order, std::uint64_t seed);

model::ModelInput make_model_input(const RouteView& view, const RouteModel& model);

// Stable 64-bit FNV-1a; used to derive per-route random streams.
std::uint64_t fnv1a(const std::string& s);

// Checkpoint: versioned JSON, doubles written in shortest round-trip form,
// so save/load is bit-exact.
void save_checkpoint(const RouteModel& model, const std::filesystem::path& path);
RouteModel load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_json(const RouteModel& model);
RouteModel checkpoint_from_json(const std::string& text);

}  // namespace routeseq
