#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "routeseq/stop_completion.hpp"

using namespace routeseq;

TEST_CASE("singleton zones expand to their stops") {
  std::mt19937_64 rng(1);
  const auto r = oracle::random_route({1, 1, 1, 1}, rng);
  const auto zi = build_zone_instance(r);
  const std::vector<std::size_t> order{2, 0, 3, 1};
  const auto seq = complete_sequence(order, zi, r);
  std::vector<std::size_t> expect{0};
  for (std::size_t z : order) expect.push_back(zi.zones[z].member_stops[0]);
  expect.push_back(0);
  CHECK(seq == expect);
}

TEST_CASE("two-stop zone takes the cheaper orientation") {
  std::mt19937_64 rng(2);
  const auto r = oracle::random_route({2}, rng);
  const auto zi = build_zone_instance(r);
  const auto seq = complete_sequence({0}, zi, r);
  // candidates cover both stops, so each orientation is reachable
  const bool forward = r.travel_time(1, 2) <= r.travel_time(2, 1);
  CHECK(seq == (forward ? std::vector<std::size_t>{0, 1, 2, 0} : std::vector<std::size_t>{0, 2, 1, 0}));
  const auto paths = zone_paths({0}, zi, r);
  CHECK(paths[0].travel_time == std::min(r.travel_time(1, 2), r.travel_time(2, 1)));
}

TEST_CASE("completion covers every stop once and keeps zones contiguous") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto r = oracle::random_route({3, 1, 4, 2, 5}, rng);
    const auto zi = build_zone_instance(r);
    std::vector<std::size_t> order(zi.n_zones());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto seq = complete_sequence(order, zi, r);
    CHECK(seq.front() == 0);
    CHECK(seq.back() == 0);
    std::set<std::size_t> seen(seq.begin() + 1, seq.end() - 1);
    CHECK(seen.size() == r.n_stops());
    std::vector<std::size_t> zone_run;
    for (std::size_t k = 1; k + 1 < seq.size(); ++k) {
      const std::size_t z = zi.zone_of_node[seq[k]];
      if (zone_run.empty() || zone_run.back() != z) zone_run.push_back(z);
    }
    CHECK(zone_run == order);
  }
}

TEST_CASE("five-stop zone matches brute force over endpoint-restricted orders") {
  std::mt19937_64 rng(4);
  const auto r = oracle::random_route({5, 2}, rng);
  const auto zi = build_zone_instance(r);
  const auto& members = zi.zones[0].member_stops;
  const auto& next = zi.zones[1].member_stops;
  const auto firsts = candidate_first_stops(members, 0, r, 3);
  const auto lasts = candidate_last_stops(members, next, r, 3);
  CHECK(firsts.size() == 3);
  CHECK(lasts.size() == 3);
  const auto path = best_zone_path(members, firsts, lasts, r);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> perm = members;
  std::sort(perm.begin(), perm.end());
  do {
    const bool f = std::find(firsts.begin(), firsts.end(), perm.front()) != firsts.end();
    const bool l = std::find(lasts.begin(), lasts.end(), perm.back()) != lasts.end();
    if (f && l) best = std::min(best, oracle::path_cost(perm, r.travel_time, false));
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(path.travel_time <= best + 1e-9);
}

TEST_CASE("candidate rules") {
  std::mt19937_64 rng(5);
  auto r = oracle::random_route({4, 1}, rng);
  const std::vector<std::size_t> members{1, 2, 3, 4};
  r.travel_time(0, 1) = 50;
  r.travel_time(0, 2) = 10;
  r.travel_time(0, 3) = 30;
  r.travel_time(0, 4) = 10;
  CHECK(candidate_first_stops(members, 0, r, 3) == std::vector<std::size_t>{2, 4, 3});
  r.travel_time(1, 5) = 1;
  r.travel_time(2, 5) = 9;
  r.travel_time(3, 5) = 3;
  r.travel_time(4, 5) = 2;
  CHECK(candidate_last_stops(members, {5}, r, 3) == std::vector<std::size_t>{1, 4, 3});
  CHECK(candidate_first_stops({7}, 0, r, 3).size() == 1);
}
