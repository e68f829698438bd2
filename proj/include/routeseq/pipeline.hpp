#pragma once

// Batch prediction and evaluation over a set of routes.

#include <memory>
#include <vector>

#include "routeseq/inference.hpp"
#include "routeseq/predictor.hpp"
#include "routeseq/scoring.hpp"

namespace routeseq {

// Routes together with their zone views. Views point into `routes`, so the
// object is move-only.
class PreparedRoutes {
 public:
  explicit PreparedRoutes(std::vector<RouteInstance> routes, kernels::Exec exec = kernels::Exec::parallel);
  PreparedRoutes(const PreparedRoutes&) = delete;
  PreparedRoutes& operator=(const PreparedRoutes&) = delete;
  PreparedRoutes(PreparedRoutes&&) = default;
  PreparedRoutes& operator=(PreparedRoutes&&) = default;

  std::size_t size() const { return routes_->size(); }
  const std::vector<RouteInstance>& routes() const { return *routes_; }
  const std::vector<RouteView>& views() const { return views_; }
  std::vector<const RouteInstance*> pointers() const;

 private:
  std::unique_ptr<std::vector<RouteInstance>> routes_;  // stable address for the views
  std::vector<RouteView> views_;
};

struct PredictOptions {
  GenerationMode mode = GenerationMode::first_zone_iterated;
  bool strict = false;
  kernels::Exec exec = kernels::Exec::parallel;  // across routes
};

std::vector<PredictedSequence> predict_all(const RouteModel& model, const PreparedRoutes& routes,
                                           const PredictOptions& opts = {});

scoring::DisparityReport evaluate_model(const RouteModel& model, const PreparedRoutes& routes,
                                        const PredictOptions& opts = {}, std::size_t k = 4);

// Planned zone tour, expanded with stop completion.
scoring::DisparityReport evaluate_tsp(const PreparedRoutes& routes, std::size_t k = 4,
                                      kernels::Exec exec = kernels::Exec::parallel);

scoring::DisparityReport evaluate_predictions(const PreparedRoutes& routes,
                                              const std::vector<scoring::Prediction>& predictions,
                                              std::size_t k = 4, kernels::Exec exec = kernels::Exec::parallel);

}  // namespace routeseq
