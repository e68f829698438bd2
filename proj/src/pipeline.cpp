#include "routeseq/pipeline.hpp"

#include <memory>

#include "routeseq/error.hpp"

namespace routeseq {

PreparedRoutes::PreparedRoutes(std::vector<RouteInstance> routes, kernels::Exec exec)
    : routes_(std::make_unique<std::vector<RouteInstance>>(std::move(routes))) {
  views_.resize(routes_->size());
  kernels::for_each_index(routes_->size(), [&](std::size_t i) { views_[i] = make_route_view((*routes_)[i]); }, exec);
}

std::vector<const RouteInstance*> PreparedRoutes::pointers() const {
  std::vector<const RouteInstance*> out;
  for (const auto& r : *routes_) out.push_back(&r);
  return out;
}

namespace {

PredictedSequence predict_one(const RouteModel& model, const RouteView& view, const PredictOptions& opts) {
  const auto input = make_model_input(view, model);
  if (opts.mode == GenerationMode::greedy) return greedy_decode(model.params, input, view.zones);
  GenerationOptions g;
  g.strict = opts.strict;
  g.exec = kernels::Exec::serial;  // parallelism lives at the route level
  return generate_best_first(model.params, input, view.zones, g);
}

}  // namespace

std::vector<PredictedSequence> predict_all(const RouteModel& model, const PreparedRoutes& routes,
                                           const PredictOptions& opts) {
  std::vector<PredictedSequence> out(routes.size());
  std::vector<std::string> errors(routes.size());
  kernels::for_each_index(
      routes.size(),
      [&](std::size_t i) {
        try {
          out[i] = predict_one(model, routes.views()[i], opts);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      },
      opts.exec);
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) throw InvalidInput("route '" + routes.routes()[i].route_id + "': " + errors[i]);
  return out;
}

scoring::DisparityReport evaluate_model(const RouteModel& model, const PreparedRoutes& routes,
                                        const PredictOptions& opts, std::size_t k) {
  scoring::EvaluationOptions eo;
  eo.k = k;
  eo.exec = opts.exec;
  return scoring::evaluate_testset(
      routes.pointers(),
      [&](std::size_t i) {
        scoring::Prediction p;
        p.zone_order = predict_one(model, routes.views()[i], opts).zone_order;
        return p;
      },
      eo);
}

scoring::DisparityReport evaluate_tsp(const PreparedRoutes& routes, std::size_t k, kernels::Exec exec) {
  scoring::EvaluationOptions eo;
  eo.k = k;
  eo.exec = exec;
  return scoring::evaluate_testset(
      routes.pointers(),
      [&](std::size_t i) {
        scoring::Prediction p;
        p.zone_order = routes.views()[i].tsp_order;
        return p;
      },
      eo);
}

scoring::DisparityReport evaluate_predictions(const PreparedRoutes& routes,
                                              const std::vector<scoring::Prediction>& predictions, std::size_t k,
                                              kernels::Exec exec) {
  if (predictions.size() != routes.size()) throw InvalidInput("evaluate_predictions: one prediction per route required");
  scoring::EvaluationOptions eo;
  eo.k = k;
  eo.exec = exec;
  return scoring::evaluate_testset(routes.pointers(), [&](std::size_t i) { return predictions[i]; }, eo);
}

}  // namespace routeseq
