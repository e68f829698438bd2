// routeseq command-line driver.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "routeseq/datagen.hpp"
#include "routeseq/dataset_io.hpp"
#include "routeseq/error.hpp"
#include "routeseq/pipeline.hpp"
#include "routeseq/stop_completion.hpp"
#include "routeseq/training.hpp"
#include "routeseq/tsp.hpp"

using namespace routeseq;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// --config files are flat JSON objects keyed by long option name. Their
// entries are appended as arguments unless the command line already sets
// the same option.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    else if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
  const auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  const auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string flag = "--" + it.key();
    if (given(flag)) continue;
    if (it->is_boolean()) {
      if (it->get<bool>()) args.push_back(flag);
    } else if (it->is_array()) {
      for (const auto& v : *it) {
        args.push_back(flag);
        args.push_back(scalar(v));
      }
    } else {
      args.push_back(flag);
      args.push_back(scalar(*it));
    }
  }
  return args;
}

json resolved_config(const CLI::App& sub) {
  json j;
  j["command"] = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      j[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

void print_error(const std::string& kind, const std::string& message, const std::string& path = {}) {
  json e{{"kind", kind}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  std::cerr << json{{"error", e}}.dump() << '\n';
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    io::write_text_file(path, j.dump(2));
  }
}

GenerationMode parse_mode(const std::string& s) {
  if (s == "greedy") return GenerationMode::greedy;
  if (s == "best-first") return GenerationMode::first_zone_iterated;
  throw ConfigError("unknown generation mode '" + s + "' (greedy|best-first)");
}

std::string mode_label(GenerationMode m) { return m == GenerationMode::greedy ? "greedy" : "best-first"; }

struct Options {
  std::uint64_t seed = 1;
  std::string data, out, model, predictions, baseline, report, csv, test_out, test_data;
  // generate
  std::size_t n_routes = 100, zones_min = 5, zones_max = 15, stops_min = 3, stops_max = 10;
  double city_km = 20.0, speed_kmh = 30.0, noise_sigma = 0.1;
  std::string behavior = "cluster_biased";
  // train
  std::string variant = "pairwise", input_order = "tsp";
  std::size_t epochs = 30, hidden = 32;
  double lr = 0.001, train_fraction = 0.8, clip_norm = 0.0;
  bool unmasked_training = false;
  // predict / evaluate
  std::string mode = "best-first";
  bool strict_best_first = false, stops = false, serial = false;
  std::size_t k = 4;
};

kernels::Exec exec_of(const Options& o) { return o.serial ? kernels::Exec::serial : kernels::Exec::parallel; }

training::TrainConfig train_config(const Options& o) {
  training::TrainConfig c;
  c.variant = model::parse_variant(o.variant);
  c.epochs = o.epochs;
  c.learning_rate = o.lr;
  c.seed = o.seed;
  c.input_order = parse_input_order(o.input_order);
  c.train_fraction = o.train_fraction;
  c.clip_norm = o.clip_norm;
  c.mask_visited = !o.unmasked_training;
  c.hidden = o.hidden;
  c.pointer_hidden = o.hidden;
  c.validate();
  return c;
}

PredictOptions predict_options(const Options& o) {
  PredictOptions p;
  p.mode = parse_mode(o.mode);
  p.strict = o.strict_best_first;
  p.exec = exec_of(o);
  return p;
}

// ---------------------------------------------------------------------------

int run_generate(const Options& o) {
  datagen::SynthConfig c;
  c.n_routes = o.n_routes;
  c.zones_min = o.zones_min;
  c.zones_max = o.zones_max;
  c.stops_min = o.stops_min;
  c.stops_max = o.stops_max;
  c.city_km = o.city_km;
  c.speed_kmh = o.speed_kmh;
  c.noise_sigma = o.noise_sigma;
  c.behavior = datagen::parse_behavior(o.behavior);
  c.seed = o.seed;
  const auto routes = datagen::generate(c);
  io::save_routes(routes, o.out);
  std::cerr << "wrote " << routes.size() << " routes to " << o.out << '\n';
  return 0;
}

int run_solve_tsp(const Options& o) {
  const PreparedRoutes routes(io::load_routes(o.data), exec_of(o));
  std::vector<io::RoutePrediction> out(routes.size());
  kernels::for_each_index(
      routes.size(),
      [&](std::size_t i) {
        const auto& view = routes.views()[i];
        const auto stops = complete_sequence(view.tsp_order, view.zones, routes.routes()[i]);
        out[i] = io::describe_prediction(routes.routes()[i], view.zones, view.tsp_order, stops,
                                         operational_cost(view.tsp_order, view.zones));
      },
      exec_of(o));
  write_json(o.out, io::predictions_to_json(out));
  return 0;
}

int run_train(const Options& o) {
  const auto cfg = train_config(o);
  auto routes = io::load_routes(o.data);
  std::vector<RouteInstance> train_set;
  if (cfg.train_fraction < 1.0) {
    auto split = training::split_dataset(routes, cfg.train_fraction, cfg.seed);
    if (!o.test_out.empty()) io::save_routes(split.test, o.test_out);
    train_set = std::move(split.train);
  } else {
    if (!o.test_out.empty()) throw ConfigError("--test-out needs --train-fraction below 1");
    train_set = std::move(routes);
  }
  const auto result = training::train(train_set, cfg, [](std::size_t epoch, double loss) {
    std::fprintf(stderr, "epoch %zu mean loss %.6f\n", epoch, loss);
  });
  save_checkpoint(result.model, o.out);
  std::fprintf(stderr, "trained %zu routes in %.2f s, checkpoint %s\n", result.report.n_routes,
               result.report.wall_seconds, result.report.checkpoint_id.c_str());
  if (!o.report.empty()) write_json(o.report, training::report_json(result.report, cfg));
  return 0;
}

int run_predict(const Options& o) {
  const auto model = load_checkpoint(o.model);
  const auto popts = predict_options(o);
  const PreparedRoutes routes(io::load_routes(o.data), popts.exec);
  const auto predicted = predict_all(model, routes, popts);
  std::vector<io::RoutePrediction> out(routes.size());
  for (std::size_t i = 0; i < routes.size(); ++i) {
    const auto& view = routes.views()[i];
    std::optional<std::vector<std::size_t>> stops;
    if (o.stops) stops = complete_sequence(predicted[i].zone_order, view.zones, routes.routes()[i]);
    out[i] = io::describe_prediction(routes.routes()[i], view.zones, predicted[i].zone_order, stops,
                                     predicted[i].operational_cost);
  }
  write_json(o.out, io::predictions_to_json(out));
  return 0;
}

std::vector<scoring::Prediction> load_predictions_for(const PreparedRoutes& routes, const std::string& path) {
  const auto file = io::predictions_from_json(io::read_json_file(path));
  std::map<std::string, const io::RoutePrediction*> by_id;
  for (const auto& p : file)
    if (!by_id.emplace(p.route_id, &p).second) throw InvalidInput("duplicate prediction for route '" + p.route_id + "'");
  std::vector<scoring::Prediction> out;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    const auto& route = routes.routes()[i];
    const auto it = by_id.find(route.route_id);
    if (it == by_id.end()) throw InvalidInput("no prediction for route '" + route.route_id + "'");
    out.push_back(io::resolve_prediction(*it->second, route, routes.views()[i].zones));
  }
  return out;
}

int run_evaluate(const Options& o) {
  const int sources = !o.model.empty() + !o.predictions.empty() + !o.baseline.empty();
  if (sources != 1) throw ConfigError("evaluate needs exactly one of --model, --predictions, --baseline");
  if (!o.baseline.empty() && o.baseline != "tsp") throw ConfigError("unknown baseline '" + o.baseline + "' (tsp)");
  const PreparedRoutes routes(io::load_routes(o.data), exec_of(o));
  scoring::DisparityReport report;
  if (!o.model.empty()) {
    report = evaluate_model(load_checkpoint(o.model), routes, predict_options(o), o.k);
  } else if (!o.predictions.empty()) {
    report = evaluate_predictions(routes, load_predictions_for(routes, o.predictions), o.k, exec_of(o));
  } else {
    report = evaluate_tsp(routes, o.k, exec_of(o));
  }
  write_json(o.out, io::report_to_json(report));
  if (!o.csv.empty()) io::write_text_file(o.csv, io::report_csv(report));
  std::fprintf(stderr, "mean R %.6g over %zu routes (%zu failed)\n", report.mean_disparity, report.routes.size(),
               report.failures.size());
  return 0;
}

json summary_row(const std::string& generation, const std::string& model, const scoring::DisparityReport& r) {
  return {{"generation", generation}, {"model", model},          {"mean_disparity", r.mean_disparity},
          {"std_disparity", r.std_disparity}, {"median_disparity", r.median_disparity},
          {"accuracy", r.accuracy},       {"mean_operational_cost", r.mean_operational_cost},
          {"n_routes", r.routes.size()},  {"n_failures", r.failures.size()}};
}

int run_benchmark(const Options& o) {
  auto routes = io::load_routes(o.data);
  std::vector<RouteInstance> train_set, test_set;
  std::mt19937_64 rng(o.seed);
  const std::uint64_t split_seed = rng();
  if (!o.test_data.empty()) {
    train_set = std::move(routes);
    test_set = io::load_routes(o.test_data);
  } else {
    auto split = training::split_dataset(routes, o.train_fraction, split_seed);
    train_set = std::move(split.train);
    test_set = std::move(split.test);
  }
  const PreparedRoutes train_views(std::move(train_set), exec_of(o));
  const PreparedRoutes test_views(std::move(test_set), exec_of(o));

  json rows = json::array();
  rows.push_back(summary_row("tsp", "TSP", evaluate_tsp(test_views, o.k, exec_of(o))));
  std::size_t oc_violations = 0;
  for (model::Variant v : model::kAllVariants) {
    Options vo = o;
    vo.variant = model::to_string(v);
    auto cfg = train_config(vo);
    cfg.seed = rng();
    const auto trained = training::train(train_views.views(), cfg);
    std::fprintf(stderr, "%s trained in %.2f s, final loss %.6f\n", vo.variant.c_str(), trained.report.wall_seconds,
                 trained.report.epoch_loss.back());
    PredictOptions greedy = predict_options(o), best_first = predict_options(o);
    greedy.mode = GenerationMode::greedy;
    best_first.mode = GenerationMode::first_zone_iterated;
    const auto rg = evaluate_model(trained.model, test_views, greedy, o.k);
    const auto ra = evaluate_model(trained.model, test_views, best_first, o.k);
    std::map<std::string, double> greedy_oc;
    for (const auto& s : rg.routes) greedy_oc[s.route_id] = s.operational_cost;
    for (const auto& s : ra.routes) {
      const auto it = greedy_oc.find(s.route_id);
      if (it != greedy_oc.end() && s.operational_cost > it->second + 1e-9) ++oc_violations;
    }
    rows.push_back(summary_row(mode_label(GenerationMode::greedy), vo.variant, rg));
    rows.push_back(summary_row(mode_label(GenerationMode::first_zone_iterated), vo.variant, ra));
  }

  std::ostringstream table;
  table << "| Generation | Model | Mean R | Std R | Median R |";
  for (std::size_t k = 1; k <= o.k; ++k) table << " Zone " << k << " |";
  table << " Mean OC |\n|---|---|---|---|---|";
  for (std::size_t k = 1; k <= o.k; ++k) table << "---|";
  table << "---|\n";
  char buf[64];
  for (const auto& r : rows) {
    table << "| " << r["generation"].get<std::string>() << " | " << r["model"].get<std::string>() << " |";
    for (const char* key : {"mean_disparity", "std_disparity", "median_disparity"}) {
      std::snprintf(buf, sizeof buf, " %.6f |", r[key].get<double>());
      table << buf;
    }
    for (double a : r["accuracy"]) {
      std::snprintf(buf, sizeof buf, " %.3f |", a);
      table << buf;
    }
    std::snprintf(buf, sizeof buf, " %.1f |\n", r["mean_operational_cost"].get<double>());
    table << buf;
  }
  std::cout << table.str();

  json out{{"rows", rows}, {"best_first_oc_violations", oc_violations}, {"n_train", train_views.size()},
           {"n_test", test_views.size()}};
  if (!o.out.empty()) io::write_text_file(o.out, out.dump(2));
  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "generation,model,mean_disparity,std_disparity,median_disparity";
    for (std::size_t k = 1; k <= o.k; ++k) csv << ",zone" << k << "_accuracy";
    csv << ",mean_operational_cost\n";
    for (const auto& r : rows) {
      csv << r["generation"].get<std::string>() << ',' << r["model"].get<std::string>() << ','
          << r["mean_disparity"].get<double>() << ',' << r["std_disparity"].get<double>() << ','
          << r["median_disparity"].get<double>();
      for (double a : r["accuracy"]) csv << ',' << a;
      csv << ',' << r["mean_operational_cost"].get<double>() << '\n';
    }
    io::write_text_file(o.csv, csv.str());
  }
  if (oc_violations > 0) throw NumericError("best-first generation exceeded greedy operational cost on some routes");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zone-level delivery route sequence learning and evaluation"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", "JSON file with option values (keys are long option names)");
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_flag("--serial", o.serial, "Disable OpenMP parallel loops")->default_str("false");
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  common(gen);
  gen->add_option("--out", o.out, "Dataset file to write")->required();
  gen->add_option("--n-routes", o.n_routes)->capture_default_str();
  gen->add_option("--zones-min", o.zones_min)->capture_default_str();
  gen->add_option("--zones-max", o.zones_max)->capture_default_str();
  gen->add_option("--stops-min", o.stops_min)->capture_default_str();
  gen->add_option("--stops-max", o.stops_max)->capture_default_str();
  gen->add_option("--city-km", o.city_km)->capture_default_str();
  gen->add_option("--speed-kmh", o.speed_kmh)->capture_default_str();
  gen->add_option("--noise-sigma", o.noise_sigma)->capture_default_str();
  gen->add_option("--behavior", o.behavior, "tsp|nearest_zone|cluster_biased")->capture_default_str();

  auto* solve = app.add_subcommand("solve-tsp", "Planned zone tour plus stop completion for every route");
  common(solve);
  solve->add_option("--data", o.data)->required();
  solve->add_option("--out", o.out, "Predictions file ('-' for stdout)")->capture_default_str();

  const auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--variant", o.variant, "pairwise|pointer|lstm_ed|asnn")->capture_default_str();
    sub->add_option("--epochs", o.epochs)->capture_default_str();
    sub->add_option("--lr", o.lr)->capture_default_str();
    sub->add_option("--input-order", o.input_order, "tsp|random")->capture_default_str();
    sub->add_option("--train-fraction", o.train_fraction)->capture_default_str();
    sub->add_option("--clip-norm", o.clip_norm, "Gradient-norm clip, 0 = off")->capture_default_str();
    sub->add_option("--hidden", o.hidden, "LSTM hidden width")->capture_default_str();
    sub->add_flag("--unmasked-training", o.unmasked_training,
                  "Normalize training distributions over all zones, visited ones included")
        ->default_str("false");
  };

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  common(train);
  model_flags(train);
  train->add_option("--data", o.data)->required();
  train->add_option("--out", o.out, "Checkpoint file")->required();
  train->add_option("--report", o.report, "Training report JSON");
  train->add_option("--test-out", o.test_out, "Write the held-out routes here");

  const auto generation_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "greedy|best-first")->capture_default_str();
    sub->add_flag("--strict-best-first", o.strict_best_first, "Only forced-first rollouts compete")->default_str("false");
  };

  auto* predict = app.add_subcommand("predict", "Predict zone (and stop) sequences");
  common(predict);
  generation_flags(predict);
  predict->add_option("--model", o.model)->required();
  predict->add_option("--data", o.data)->required();
  predict->add_option("--out", o.out, "Predictions file ('-' for stdout)")->capture_default_str();
  predict->add_flag("--stops", o.stops, "Also emit full stop sequences")->default_str("false");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against actual sequences");
  common(evaluate);
  generation_flags(evaluate);
  evaluate->add_option("--data", o.data)->required();
  evaluate->add_option("--model", o.model);
  evaluate->add_option("--predictions", o.predictions);
  evaluate->add_option("--baseline", o.baseline, "tsp");
  evaluate->add_option("--k", o.k, "Leading zones for positional accuracy")->capture_default_str();
  evaluate->add_option("--out", o.out, "Report file ('-' for stdout)")->capture_default_str();
  evaluate->add_option("--csv", o.csv, "Per-route CSV");

  auto* bench = app.add_subcommand("benchmark", "Train all four models and compare them with the TSP baseline");
  common(bench);
  model_flags(bench);
  generation_flags(bench);
  bench->add_option("--data", o.data, "Dataset (split into train/test unless --test-data is given)")->required();
  bench->add_option("--test-data", o.test_data);
  bench->add_option("--k", o.k)->capture_default_str();
  bench->add_option("--out", o.out, "Benchmark JSON");
  bench->add_option("--csv", o.csv);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::cerr << resolved_config(*sub).dump() << '\n';
  try {
    if (sub == gen) return run_generate(o);
    if (sub == solve) return run_solve_tsp(o);
    if (sub == train) return run_train(o);
    if (sub == predict) return run_predict(o);
    if (sub == evaluate) return run_evaluate(o);
    return run_benchmark(o);
  } catch (const ParseError& e) {
    print_error(e.kind(), e.what(), e.path());
    return kExitRuntime;
  } catch (const ConfigError& e) {
    print_error(e.kind(), e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return kExitRuntime;
  }
}
