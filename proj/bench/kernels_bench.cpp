// Serial reference vs OpenMP paths. The second benchmark argument selects
// the execution mode: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "routeseq/datagen.hpp"
#include "routeseq/kernels.hpp"
#include "routeseq/pipeline.hpp"
#include "routeseq/training.hpp"
#include "routeseq/tsp.hpp"

using namespace routeseq;

namespace {

kernels::Exec exec_of(const benchmark::State& s) {
  return s.range(1) == 0 ? kernels::Exec::serial : kernels::Exec::parallel;
}

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  Tensor t(rows, cols);
  for (double& v : t.data) v = u(rng);
  return t;
}

tsp::CostMatrix random_costs(std::size_t n, std::uint64_t seed) {
  auto c = random_matrix(n, n, seed);
  for (std::size_t i = 0; i < n; ++i) c(i, i) = 0.0;
  return c;
}

struct Fixture {
  PreparedRoutes routes;
  RouteModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    datagen::SynthConfig cfg;
    cfg.n_routes = 40;
    cfg.seed = 3;
    PreparedRoutes routes(datagen::generate(cfg));
    training::TrainConfig tc;
    tc.epochs = 1;
    auto model = training::train(routes.views(), tc).model;
    return Fixture{std::move(routes), std::move(model)};
  }();
  return f;
}

void BM_Matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto A = random_matrix(n, n, 1);
  const Vector x(n, 0.5);
  Vector y(n);
  for (auto _ : state) {
    kernels::matvec(A, x, y, exec_of(state));
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Matvec)->ArgsProduct({{128, 512}, {0, 1}});

void BM_HeldKarpTour(benchmark::State& state) {
  const auto c = random_costs(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(tsp::held_karp_tour(c, 0, exec_of(state)).cost);
}
BENCHMARK(BM_HeldKarpTour)->ArgsProduct({{10, 13}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_PredictBestFirst(benchmark::State& state) {
  const auto& f = fixture();
  PredictOptions o;
  o.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(predict_all(f.model, f.routes, o).size());
}
BENCHMARK(BM_PredictBestFirst)->ArgsProduct({{40}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_EvaluateTsp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_tsp(f.routes, 4, exec_of(state)).mean_disparity);
}
BENCHMARK(BM_EvaluateTsp)->ArgsProduct({{40}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
