#include "routeseq/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <numeric>
#include <random>

#include "routeseq/error.hpp"

namespace routeseq::training {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("train fraction must be in (0, 1]");
  if (clip_norm < 0.0) throw ConfigError("clip norm must be non-negative");
  if (hidden == 0 || pointer_hidden == 0) throw ConfigError("hidden widths must be positive");
}

std::string hex_id(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json report_json(const TrainReport& r, const TrainConfig& c, bool include_timing) {
  json j;
  j["variant"] = model::to_string(c.variant);
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["input_order"] = to_string(c.input_order);
  j["clip_norm"] = c.clip_norm;
  j["mask_visited"] = c.mask_visited;
  j["n_routes"] = r.n_routes;
  j["n_parameters"] = r.n_parameters;
  j["epoch_loss"] = r.epoch_loss;
  j["checkpoint_id"] = r.checkpoint_id;
  if (include_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

Split split_dataset(const std::vector<RouteInstance>& routes, double train_fraction, std::uint64_t seed) {
  if (routes.size() < 2) throw InvalidInput("split_dataset: need at least two routes");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidInput("split_dataset: fraction must be in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(routes.size())));
  if (n_train == 0 || n_train == routes.size())
    throw InvalidInput("split_dataset: fraction " + std::to_string(train_fraction) + " leaves one side empty");
  std::vector<std::size_t> idx(routes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  Split s;
  for (std::size_t k = 0; k < idx.size(); ++k) (k < n_train ? s.train : s.test).push_back(routes[idx[k]]);
  return s;
}

TrainResult train(const std::vector<RouteInstance>& routes, const TrainConfig& config, const EpochCallback& on_epoch) {
  std::vector<RouteView> views;
  views.reserve(routes.size());
  for (const auto& r : routes) views.push_back(make_route_view(r));
  return train(views, config, on_epoch);
}

TrainResult train(const std::vector<RouteView>& views, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (views.empty()) throw InvalidInput("train: empty dataset");
  const auto start = std::chrono::steady_clock::now();

  nn::Rng rng(config.seed);
  TrainResult result;
  RouteModel& m = result.model;
  m.scaler = fit_scaler(views);
  m.input_order = config.input_order;
  m.order_seed = config.seed;
  model::ModelDims dims;
  dims.zone_features = kZoneFeatureCount;
  dims.pair_features = kPairFeatureCount;
  dims.hidden = config.hidden;
  dims.pointer_hidden = config.pointer_hidden;
  dims.mlp_hidden = config.mlp_hidden;
  if (config.variant == model::Variant::lstm_ed) {
    m.vocabulary = build_vocabulary(views);
    dims.n_classes = m.vocabulary.size();
  }
  m.params = model::ModelParams::random(config.variant, dims, rng);

  std::vector<model::ModelInput> inputs;
  std::vector<std::vector<std::size_t>> targets;
  inputs.reserve(views.size());
  for (const auto& v : views) {
    inputs.push_back(make_model_input(v, m));
    targets.push_back(v.zones.actual_zone_sequence);
  }

  model::ModelParams grads = model::ModelParams::zeros(config.variant, dims);
  std::vector<Tensor*> param_ptrs;
  std::vector<const Tensor*> grad_ptrs;
  m.params.visit([&](const std::string&, Tensor& t) { param_ptrs.push_back(&t); });
  grads.visit([&](const std::string&, Tensor& t) { grad_ptrs.push_back(&t); });

  nn::AdamState adam;
  adam.lr = config.learning_rate;

  std::vector<std::size_t> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t r : order) {
      grads.visit([](const std::string&, Tensor& t) { t.zero(); });
      double loss = 0.0;
      try {
        loss = model::forward_logprob(inputs[r], targets[r], m.params, &grads, config.mask_visited).loss;
      } catch (const NumericError& e) {
        throw NumericError("route '" + views[r].route->route_id + "', epoch " + std::to_string(epoch + 1) + ": " +
                           e.what());
      }
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss on route '" + views[r].route->route_id + "' in epoch " +
                           std::to_string(epoch + 1));
      }
      if (config.clip_norm > 0.0) {
        double sq = 0.0;
        for (const Tensor* g : grad_ptrs)
          for (double v : g->data) sq += v * v;
        const double norm = std::sqrt(sq);
        if (norm > config.clip_norm) {
          const double s = config.clip_norm / norm;
          grads.visit([&](const std::string&, Tensor& t) {
            for (double& v : t.data) v *= s;
          });
        }
      }
      try {
        nn::adam_step(param_ptrs, grad_ptrs, adam);
      } catch (const NumericError& e) {
        throw NumericError("route '" + views[r].route->route_id + "', epoch " + std::to_string(epoch + 1) + ": " +
                           e.what());
      }
      total += loss;
    }
    const double mean = total / static_cast<double>(views.size());
    result.report.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }

  result.report.n_routes = views.size();
  result.report.n_parameters = m.params.parameter_count();
  result.report.checkpoint_id = hex_id(fnv1a(checkpoint_json(m)));
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace routeseq::training
