#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "routeseq/error.hpp"
#include "routeseq/scoring.hpp"

using namespace routeseq;
using namespace routeseq::scoring;

TEST_CASE("sequence deviation examples") {
  CHECK(sequence_deviation({1, 2, 3, 4}, {1, 2, 3, 4}) == 0.0);
  CHECK(sequence_deviation({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(sequence_deviation({1, 2, 3}, {3, 2, 1}) == 0.0);
  CHECK(sequence_deviation({5}, {5}) == 0.0);
  CHECK_THROWS_AS(sequence_deviation({1, 2, 3}, {1, 2, 2}), InvalidInput);
  CHECK_THROWS_AS(sequence_deviation({1, 2, 3}, {1, 2}), InvalidInput);
}

TEST_CASE("sequence deviation is invariant under relabelling") {
  std::mt19937_64 rng(1);
  std::vector<std::size_t> a{1, 2, 3, 4, 5, 6, 7}, b = a;
  std::shuffle(b.begin(), b.end(), rng);
  std::vector<std::size_t> relabel{0, 7, 3, 5, 1, 6, 2, 4};
  std::vector<std::size_t> a2, b2;
  for (std::size_t v : a) a2.push_back(relabel[v]);
  for (std::size_t v : b) b2.push_back(relabel[v]);
  CHECK(sequence_deviation(a, b) == sequence_deviation(a2, b2));
  CHECK(sequence_deviation(a, b) == doctest::Approx(oracle::brute_sd(a, b)).epsilon(1e-15));
}

TEST_CASE("normalized time") {
  Tensor tt(4, 4);
  tt(1, 2) = 2.0;
  tt(1, 3) = 6.0;
  tt(1, 0) = 100.0;  // depot column is not part of the normalizer
  CHECK(normalized_time(tt, 1, 3) == doctest::Approx(0.75));
  CHECK(normalized_time(tt, 2, 3) == 0.0);
}

TEST_CASE("erp of identical sequences is zero") {
  std::mt19937_64 rng(2);
  const auto tt = oracle::random_costs(6, rng);
  const auto r = erp({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}, tt);
  CHECK(r.norm == 0.0);
  CHECK(r.edits == 0);
}

TEST_CASE("erp dynamic program equals the edit-script minimum") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto tt = oracle::random_costs(n + 1, rng);
    std::vector<std::size_t> a(n), b;
    std::iota(a.begin(), a.end(), 1);
    b = a;
    std::shuffle(b.begin(), b.end(), rng);
    const auto dp = erp(a, b, tt);
    const auto bf = oracle::brute_erp(a, b, tt);
    CHECK(dp.norm == doctest::Approx(bf.norm).epsilon(1e-12));
    CHECK(dp.edits == bf.edits);
  }
}

TEST_CASE("disparity composition") {
  std::mt19937_64 rng(4);
  const auto tt = oracle::random_costs(6, rng);
  const std::vector<std::size_t> a{1, 2, 3, 4, 5}, b{2, 1, 3, 5, 4};
  const double sd = oracle::brute_sd(a, b);
  const auto e = oracle::brute_erp(a, b, tt);
  CHECK(disparity(a, b, tt) == doctest::Approx(sd * e.norm / static_cast<double>(e.edits)).epsilon(1e-12));
  CHECK(disparity(a, a, tt) == 0.0);
  // reversal keeps adjacency, so the score is zero
  CHECK(disparity(a, {5, 4, 3, 2, 1}, tt) == 0.0);
}

TEST_CASE("first-k accuracy") {
  CHECK(first_k_accuracy({0, 1, 2, 3}, {0, 1, 2, 3}, 4) == std::vector<int>{1, 1, 1, 1});
  CHECK(first_k_accuracy({0, 1, 2, 3}, {1, 0, 2, 3}, 4) == std::vector<int>{0, 0, 1, 1});
  CHECK(first_k_accuracy({0, 1, 2, 3, 4}, {4, 1, 2, 3, 0}, 4)[0] == 0);
  CHECK_THROWS_AS(first_k_accuracy({0, 1, 2}, {0, 1, 2}, 4), InvalidInput);
}

TEST_CASE("aggregate statistics") {
  std::vector<RouteScore> s(3);
  s[0].disparity = 0.1;
  s[1].disparity = 0.3;
  s[2].disparity = 0.2;
  for (auto& r : s) r.first_k = {1, 0};
  s[2].first_k = {0, 1};
  const auto rep = aggregate(s, {}, 2);
  CHECK(rep.mean_disparity == doctest::Approx(0.2));
  CHECK(rep.median_disparity == doctest::Approx(0.2));
  CHECK(rep.std_disparity == doctest::Approx(std::sqrt(0.02 / 3.0)));
  CHECK(rep.accuracy[0] == doctest::Approx(2.0 / 3.0));
  const auto one = aggregate({s[1]}, {}, 2);
  CHECK(one.mean_disparity == 0.3);
  CHECK(one.std_disparity == 0.0);
}

TEST_CASE("evaluate_testset: perfect predictor and failures") {
  std::mt19937_64 rng(5);
  std::vector<RouteInstance> routes;
  for (int k = 0; k < 4; ++k) routes.push_back(oracle::random_route({2, 1, 3, 2, 1}, rng, "r" + std::to_string(k)));
  std::vector<ZoneInstance> zones;
  for (const auto& r : routes) zones.push_back(build_zone_instance(r));
  std::vector<const RouteInstance*> ptrs;
  for (const auto& r : routes) ptrs.push_back(&r);
  const auto perfect = evaluate_testset(ptrs, [&](std::size_t i) {
    Prediction p;
    p.zone_order = zones[i].actual_zone_sequence;
    p.stop_sequence = routes[i].actual_stop_sequence;
    return p;
  });
  CHECK(perfect.mean_disparity == 0.0);
  for (double a : perfect.accuracy) CHECK(a == 1.0);

  const auto partial = evaluate_testset(ptrs, [&](std::size_t i) {
    if (i == 2) throw InvalidInput("no prediction");
    Prediction p;
    p.zone_order = zones[i].actual_zone_sequence;
    p.stop_sequence = routes[i].actual_stop_sequence;
    return p;
  });
  CHECK(partial.routes.size() == 3);
  REQUIRE(partial.failures.size() == 1);
  CHECK(partial.failures[0].route_id == "r2");
}
