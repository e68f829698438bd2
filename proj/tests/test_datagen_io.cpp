#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "routeseq/datagen.hpp"
#include "routeseq/dataset_io.hpp"
#include "routeseq/error.hpp"
#include "routeseq/pipeline.hpp"

using namespace routeseq;
using nlohmann::json;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("routeseq_test_" + name);
}

datagen::SynthConfig config(datagen::Behavior b, std::size_t n = 40) {
  datagen::SynthConfig c;
  c.n_routes = n;
  c.behavior = b;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("generation is deterministic") {
  const auto c = config(datagen::Behavior::cluster_biased, 10);
  CHECK(io::routes_to_json(datagen::generate(c)).dump() == io::routes_to_json(datagen::generate(c)).dump());
  auto d = c;
  d.seed = 12;
  CHECK(io::routes_to_json(datagen::generate(d)).dump() != io::routes_to_json(datagen::generate(c)).dump());
}

TEST_CASE("generated routes are well formed") {
  const auto routes = datagen::generate(config(datagen::Behavior::cluster_biased, 20));
  for (const auto& r : routes) {
    validate_route(r);
    for (std::size_t i = 0; i < r.n_nodes(); ++i)
      for (std::size_t j = 0; j < r.n_nodes(); ++j) {
        if (i == j) CHECK(r.travel_time(i, j) == 0.0);
        else CHECK(r.travel_time(i, j) > 0.0);
      }
    for (const auto& s : r.stops) CHECK(parse_zone_id(s.zone_id).has_value());
    const auto zi = build_zone_instance(r);
    CHECK(zi.n_zones() >= 5);
    CHECK(zi.n_zones() <= 15);
  }
}

TEST_CASE("planted tsp behaviour is matched by the tsp baseline") {
  const PreparedRoutes routes(datagen::generate(config(datagen::Behavior::tsp)));
  const auto rep = evaluate_tsp(routes);
  CHECK(rep.failures.empty());
  CHECK(rep.mean_disparity < 1e-12);
}

TEST_CASE("cluster-biased behaviour departs from the tsp order on most routes") {
  const PreparedRoutes routes(datagen::generate(config(datagen::Behavior::cluster_biased, 60)));
  std::size_t differ = 0;
  for (const auto& v : routes.views()) differ += v.zones.actual_zone_sequence != v.tsp_order;
  CHECK(differ * 2 > routes.size());
  // and the tsp baseline is strictly imperfect
  CHECK(evaluate_tsp(routes).mean_disparity > 0.0);
}

TEST_CASE("invalid generator settings are rejected") {
  auto c = config(datagen::Behavior::tsp);
  c.zones_min = 9;
  c.zones_max = 4;
  CHECK_THROWS_AS(datagen::generate(c), InvalidInput);
  c = config(datagen::Behavior::tsp);
  c.speed_kmh = 0.0;
  CHECK_THROWS_AS(datagen::generate(c), InvalidInput);
  CHECK_THROWS(datagen::parse_behavior("random_walk"));
}

TEST_CASE("save and load round trip") {
  const auto routes = datagen::generate(config(datagen::Behavior::nearest_zone, 8));
  const auto path = temp_file("roundtrip.json");
  io::save_routes(routes, path);
  const auto back = io::load_routes(path);
  CHECK(back == routes);
  std::filesystem::remove(path);
}

TEST_CASE("load reports schema problems") {
  auto j = io::routes_to_json(datagen::generate(config(datagen::Behavior::tsp, 2)));
  auto bad = j;
  bad["routes"][1]["travel_time_s"].erase(bad["routes"][1]["travel_time_s"].size() - 1);
  const std::string id = bad["routes"][1]["route_id"];
  try {
    io::routes_from_json(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(id) != std::string::npos);
    CHECK(e.path() == "/routes/1/travel_time_s");
  }

  auto no_meta = j;
  no_meta["routes"][0].erase("metadata");
  no_meta["routes"][0]["stops"][0].erase("n_packages");
  no_meta["routes"][0]["depot"].erase("id");
  const auto routes = io::routes_from_json(no_meta);
  CHECK(routes[0].metadata.empty());
  CHECK(routes[0].stops[0].n_packages == 0.0);

  auto missing = j;
  missing["routes"][0]["stops"][2].erase("zone_id");
  CHECK_THROWS_AS(io::routes_from_json(missing), ParseError);
  auto version = j;
  version["version"] = "other/9";
  CHECK_THROWS_AS(io::routes_from_json(version), ParseError);
  auto unknown = j;
  unknown["routes"][0]["actual_sequence"][0] = "nope";
  CHECK_THROWS_AS(io::routes_from_json(unknown), ParseError);
}

TEST_CASE("predictions round trip and resolve") {
  const auto routes = datagen::generate(config(datagen::Behavior::tsp, 3));
  std::vector<io::RoutePrediction> preds;
  for (const auto& r : routes) {
    const auto zi = build_zone_instance(r);
    preds.push_back(io::describe_prediction(r, zi, zi.actual_zone_sequence, r.actual_stop_sequence, 12.5));
  }
  const auto back = io::predictions_from_json(io::predictions_to_json(preds));
  REQUIRE(back.size() == 3);
  const auto zi = build_zone_instance(routes[1]);
  const auto p = io::resolve_prediction(back[1], routes[1], zi);
  CHECK(p.zone_order == zi.actual_zone_sequence);
  CHECK(*p.stop_sequence == routes[1].actual_stop_sequence);
  CHECK(*back[1].operational_cost == 12.5);
  auto wrong = back[1];
  wrong.zone_ids[0] = "Z-9.9Z";
  CHECK_THROWS_AS(io::resolve_prediction(wrong, routes[1], zi), InvalidInput);
}
