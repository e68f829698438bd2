#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "routeseq/core_model.hpp"
#include "routeseq/model.hpp"
#include "routeseq/predictor.hpp"

namespace routeseq::training {

struct TrainConfig {
  model::Variant variant = model::Variant::pairwise;
  std::size_t epochs = 30;
  double learning_rate = 0.001;
  std::uint64_t seed = 0;
  InputOrder input_order = InputOrder::tsp;
  double train_fraction = 0.8;  // test fraction is the remainder
  double clip_norm = 0.0;       // global gradient-norm clip; 0 disables
  bool mask_visited = true;     // renormalize training distributions over unvisited zones
  std::size_t hidden = 32;
  std::size_t pointer_hidden = 32;
  std::vector<std::size_t> mlp_hidden{128, 128};

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean per-route negative log-likelihood
  double wall_seconds = 0.0;
  std::string checkpoint_id;       // FNV-1a of the serialized checkpoint, hex
  std::size_t n_routes = 0;
  std::size_t n_parameters = 0;
};

// Wall time is left out unless asked for, so the file is reproducible.
nlohmann::json report_json(const TrainReport& report, const TrainConfig& config, bool include_timing = false);

struct Split {
  std::vector<RouteInstance> train, test;
};

// Seeded shuffle, then the first round(fraction * n) routes go to train.
Split split_dataset(const std::vector<RouteInstance>& routes, double train_fraction, std::uint64_t seed);

struct TrainResult {
  RouteModel model;
  TrainReport report;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

TrainResult train(const std::vector<RouteInstance>& routes, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Prepared-view overload; views must outlive the call.
TrainResult train(const std::vector<RouteView>& views, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

std::string hex_id(std::uint64_t h);

}  // namespace routeseq::training
