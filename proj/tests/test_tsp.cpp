#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "routeseq/error.hpp"
#include "routeseq/tsp.hpp"

using namespace routeseq;
using namespace routeseq::tsp;

TEST_CASE("tour on a single node") {
  const Tensor c(1, 1);
  const auto s = solve_tour(c, 0);
  CHECK(s.order == std::vector<std::size_t>{0});
  CHECK(s.cost == 0.0);
}

TEST_CASE("unit triangle tour costs 3") {
  Tensor c(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) c(i, j) = i == j ? 0.0 : 1.0;
  const auto s = solve_tour(c, 1);
  CHECK(s.cost == 3.0);
  CHECK(s.order.front() == 1);
  CHECK(s.order.size() == 3);
}

TEST_CASE("held-karp tour equals brute force on a 7-node instance") {
  std::mt19937_64 rng(5);
  const auto c = oracle::random_costs(7, rng);
  const auto best = oracle::brute_tour(c, 0);
  const auto s = held_karp_tour(c, 0);
  CHECK(s.cost == doctest::Approx(best.cost).epsilon(1e-12));
  CHECK(s.order == best.order);
  CHECK(held_karp_tour(c, 0, kernels::Exec::parallel).order == s.order);
}

TEST_CASE("paths") {
  Tensor two(2, 2);
  two(0, 1) = 4.0;
  two(1, 0) = 9.0;
  const auto p = solve_path(two, 0, 1);
  CHECK(p.order == std::vector<std::size_t>{0, 1});
  CHECK(p.cost == 4.0);

  const Tensor one(1, 1);
  const auto q = solve_path(one, 0, 0);
  CHECK(q.order == std::vector<std::size_t>{0});
  CHECK(q.cost == 0.0);

  std::mt19937_64 rng(6);
  const auto c = oracle::random_costs(6, rng);
  const auto best = oracle::brute_path(c, 2, 4);
  const auto s = held_karp_path(c, 2, 4);
  CHECK(s.order == best.order);
  CHECK(s.cost == doctest::Approx(best.cost).epsilon(1e-12));
  CHECK_THROWS_AS(solve_path(c, 3, 3), InvalidInput);
}

TEST_CASE("route cost") {
  Tensor c(3, 3);
  c(0, 1) = 5;
  c(1, 2) = 7;
  c(2, 0) = 9;
  c(1, 0) = 1;
  c(2, 1) = 1;
  c(0, 2) = 1;
  CHECK(route_cost({0}, Tensor(1, 1), true) == 0.0);
  CHECK(route_cost({0, 1, 2}, c, true) == 21.0);
  CHECK(route_cost({0, 2, 1}, c, true) == 3.0);
  CHECK_THROWS(route_cost({0, 1, 1}, c, true));
  CHECK_THROWS(route_cost({0, 1, 3}, c, true));
}

TEST_CASE("matrix validation") {
  Tensor neg(2, 2);
  neg(0, 1) = -1;
  CHECK_THROWS_AS(validate(neg), InvalidInput);
  Tensor diag(2, 2);
  diag(1, 1) = 2;
  CHECK_THROWS_AS(validate(diag), InvalidInput);
  CHECK_THROWS_AS(validate(Tensor(2, 3)), InvalidInput);
}

TEST_CASE("heuristics: never below exact, 2-opt never above nearest neighbour") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 8;
    const auto c = oracle::random_costs(n, rng);
    const auto exact = held_karp_tour(c, 0);
    const auto nn = nearest_neighbor_tour(c, 0);
    const auto opt = two_opt(nn, c);
    CHECK(opt.cost <= nn.cost + 1e-9);
    CHECK(opt.cost >= exact.cost - 1e-9);
    CHECK(opt.order.front() == 0);
    const auto ep = held_karp_path(c, 0, n - 1);
    const auto hp = heuristic_path(c, 0, n - 1);
    CHECK(hp.cost >= ep.cost - 1e-9);
    CHECK(hp.order.front() == 0);
    CHECK(hp.order.back() == n - 1);
  }
}

TEST_CASE("dispatch switches to the heuristic above the threshold") {
  std::mt19937_64 rng(9);
  const auto c = oracle::random_costs(16, rng);
  const auto s = solve_tour(c, 0);
  CHECK(s.method == Method::heuristic);
  CHECK(s.cost == doctest::Approx(route_cost(s.order, c, true)));
  SolverOptions o;
  o.exact_threshold = 16;
  CHECK(solve_tour(c, 0, o).method == Method::exact);
}
