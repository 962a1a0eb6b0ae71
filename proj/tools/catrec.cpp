// Copyright 2026 The CatRec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: data preparation, training, evaluation and
// serving.

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "catrec/checkpoint.hpp"
#include "catrec/config.hpp"
#include "catrec/dataset.hpp"
#include "catrec/evaluation.hpp"
#include "catrec/explain.hpp"
#include "catrec/service.hpp"
#include "catrec/synthetic.hpp"
#include "catrec/training.hpp"

// After the project headers: these pull in system macros that clash with Eigen.
#include <CLI11.hpp>
#include <httplib.h>

namespace fs = std::filesystem;
using namespace catrec;

namespace {

std::string run_name(TrainingMode mode, std::uint64_t seed) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::localtime(&now));
  return std::string(stamp) + "_seed" + std::to_string(seed) + "_" + std::string(to_string(mode));
}

int cmd_synth(const fs::path& out, const SyntheticOptions& options) {
  const auto paths = write_synthetic_corpus(out, generate_synthetic_corpus(options));
  std::cout << "wrote " << paths.redial_train << ", " << paths.redial_test << ", "
            << paths.movielens << "\n";
  return 0;
}

int cmd_ingest(const DatasetPaths& paths, const IngestOptions& options, const fs::path& out) {
  const Dataset ds = ingest(paths, options);
  save_dataset(out, ds);
  for (const auto& w : ds.movielens_report.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& w : ds.parse_report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << ds.report();
  return 0;
}

int cmd_train(const std::string& mode, const fs::path& config_path, const std::string& data_dir,
              const std::string& run_root) {
  FlatConfig flat = config_path.empty() ? FlatConfig() : FlatConfig::load(config_path);
  if (!mode.empty()) flat.set("mode", mode);
  if (!data_dir.empty()) flat.set("data.dir", data_dir);
  if (!run_root.empty()) flat.set("run.root", run_root);
  TrainingConfig config = TrainingConfig::from_flat(flat);
  if (config.data_dir.empty()) throw std::runtime_error("no data directory (config data.dir or --data)");
  config.data_dir = fs::absolute(config.data_dir).string();

  const LoadedData data = load_dataset(config.data_dir);
  std::cerr << "train=" << data.train.size() << " validation=" << data.validation.size()
            << " items=" << data.catalog.size() << "\n";
  auto result = run_pipeline(data.catalog, data.train, data.validation, config, &std::cerr);

  const fs::path run_dir = fs::path(config.run_root) / run_name(config.mode, config.seed);
  save_bundle(run_dir, result.bundle);
  {
    std::ofstream cfg_out(run_dir / "config.txt");
    flat.write(cfg_out);
  }
  for (const auto& r : result.reports) {
    std::ofstream rep(run_dir / ("training_report_" + r.stage + ".txt"));
    rep << r.to_string();
  }
  std::cout << run_dir.string() << "\n";
  return 0;
}

int cmd_evaluate(const fs::path& checkpoint, const std::string& split, const std::string& mode,
                 std::string data_dir, const std::string& out, bool exclude_mentioned,
                 std::uint64_t seed) {
  ModelBundle bundle = load_bundle(checkpoint);
  if (data_dir.empty()) data_dir = bundle.data_dir;
  if (data_dir.empty()) throw std::runtime_error("no data directory recorded; pass --data");
  const LoadedData data = load_dataset(data_dir);
  const auto& samples = data.split(parse_split(split));
  EvalOptions options{exclude_mentioned};

  EvalReport report;
  if (mode == "random") {
    report = evaluate_scores(samples, data.catalog, random_scorer(data.catalog.size(), seed),
                             "random", options);
  } else {
    if (!mode.empty()) {
      const TrainingMode requested = parse_mode(mode);
      if (requested == TrainingMode::kOracle)
        bundle.mode = TrainingMode::kOracle;
      else if (bundle.mode == TrainingMode::kOracle)
        throw std::runtime_error("an oracle checkpoint has no preference model for mode " + mode);
    }
    report = evaluate(bundle, samples, data.catalog, options);
  }
  report.metadata["checkpoint"] = checkpoint.string();
  report.metadata["split"] = split;
  std::cout << report.to_table();
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << report.to_key_values();
  }
  return 0;
}

std::shared_ptr<const RecommendationPipeline> load_pipeline(const fs::path& checkpoint,
                                                            const fs::path& catalog) {
  return std::make_shared<const RecommendationPipeline>(load_bundle(checkpoint),
                                                        Catalog::load(catalog));
}

ServiceConfig service_config(const FlatConfig& flat) {
  ServiceConfig c;
  c.top_k = static_cast<std::size_t>(flat.get_int("k", static_cast<long long>(c.top_k)));
  c.session_ttl = std::chrono::seconds(flat.get_int("ttl_seconds", c.session_ttl.count()));
  c.max_sessions =
      static_cast<std::size_t>(flat.get_int("max_sessions", static_cast<long long>(c.max_sessions)));
  return c;
}

int cmd_serve(const FlatConfig& flat) {
  const auto checkpoint = flat.get_string("checkpoint", "");
  const auto catalog = flat.get_string("catalog", "");
  if (checkpoint.empty() || catalog.empty())
    throw std::runtime_error("serve needs a checkpoint and a catalog");
  RecommenderService service(load_pipeline(checkpoint, catalog), service_config(flat));

  httplib::Server server;
  register_routes(server, service);
  const auto host = flat.get_string("host", "0.0.0.0");
  const int port = static_cast<int>(flat.get_int("port", 8080));
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return 0;
}

void print_turn(const TurnResponse& turn) {
  std::cout << turn.explanation.text << "\n";
  for (std::size_t i = 0; i < turn.top_k.size(); ++i) {
    const auto& t = turn.top_k[i];
    std::cout << "  " << (i + 1) << ". [" << t.item_index << "] " << t.title << "  ("
              << t.score << ")\n";
  }
}

int cmd_demo(const fs::path& checkpoint, const fs::path& catalog, std::size_t k) {
  ServiceConfig config;
  config.top_k = k;
  RecommenderService service(load_pipeline(checkpoint, catalog), config);
  std::string session = service.create_session();
  std::cout << "Type a message. Commands: /accept <item_index>, /sys <text>, /reset, /quit\n";
  std::string line;
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    try {
      if (line == "/quit") break;
      if (line == "/reset") {
        service.delete_session(session);
        session = service.create_session();
        std::cout << "(new conversation)\n";
      } else if (line.rfind("/accept ", 0) == 0) {
        service.record_system_turn(session, "", std::stoul(line.substr(8)));
        std::cout << "(recorded)\n";
      } else if (line.rfind("/sys ", 0) == 0) {
        service.record_system_turn(session, line.substr(5), std::nullopt);
        std::cout << "(recorded)\n";
      } else if (!line.empty()) {
        print_turn(service.post_message(session, line));
      }
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Category-aware explainable conversational recommender"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic ReDial-format corpus");
  std::string synth_out;
  SyntheticOptions synth_opts;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--conversations", synth_opts.conversations);
  synth->add_option("--seed", synth_opts.seed);
  synth->add_option("--genre-pool", synth_opts.genre_pool);
  synth->add_option("--genres-per-item", synth_opts.genres_per_item);
  synth->add_option("--unlinked", synth_opts.unlinked_movies);
  synth->add_option("--follow-ups", synth_opts.follow_up_turns);

  // ingest
  auto* ing = app.add_subcommand("ingest", "Build the catalog and per-split samples");
  DatasetPaths paths;
  IngestOptions ingest_opts;
  std::string ingest_out;
  ing->add_option("--redial-train", paths.redial_train)->required()->check(CLI::ExistingFile);
  ing->add_option("--redial-test", paths.redial_test)->required()->check(CLI::ExistingFile);
  ing->add_option("--movielens", paths.movielens)->required()->check(CLI::ExistingFile);
  ing->add_option("--out", ingest_out)->required();
  ing->add_option("--seed", ingest_opts.seed);
  ing->add_flag("--include-empty-history", ingest_opts.include_empty_history);

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string mode, config_path, data_dir, run_root;
  train->add_option("--mode", mode)->check(CLI::IsMember({"two_stage", "e2e", "oracle"}));
  train->add_option("--config", config_path)->check(CLI::ExistingFile);
  train->add_option("--data", data_dir, "Ingested data directory (overrides data.dir)");
  train->add_option("--run-root", run_root);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Recall@1/@10 of a checkpoint");
  std::string checkpoint, split = "test", eval_mode, eval_data, eval_out;
  bool exclude_mentioned = false;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--split", split)->check(CLI::IsMember({"train", "validation", "test"}));
  eval->add_option("--mode", eval_mode)->check(CLI::IsMember({"two_stage", "e2e", "oracle", "random"}));
  eval->add_option("--data", eval_data);
  eval->add_option("--out", eval_out);
  eval->add_flag("--exclude-mentioned", exclude_mentioned);
  eval->add_option("--seed", eval_seed, "Seed for --mode random");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP+JSON session service");
  std::string serve_config, serve_checkpoint, serve_catalog, serve_host;
  int port = 0;
  std::size_t serve_k = 0;
  serve->add_option("--config", serve_config)->check(CLI::ExistingFile);
  serve->add_option("--checkpoint", serve_checkpoint);
  serve->add_option("--catalog", serve_catalog);
  serve->add_option("--host", serve_host);
  serve->add_option("--port", port);
  serve->add_option("--k", serve_k);

  // demo
  auto* demo = app.add_subcommand("demo", "Terminal chat over the same pipeline");
  std::string demo_checkpoint, demo_catalog;
  std::size_t demo_k = 10;
  demo->add_option("--checkpoint", demo_checkpoint)->required();
  demo->add_option("--catalog", demo_catalog)->required();
  demo->add_option("--k", demo_k);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(synth_out, synth_opts);
    if (*ing) return cmd_ingest(paths, ingest_opts, ingest_out);
    if (*train) return cmd_train(mode, config_path, data_dir, run_root);
    if (*eval)
      return cmd_evaluate(checkpoint, split, eval_mode, eval_data, eval_out, exclude_mentioned,
                          eval_seed);
    if (*serve) {
      FlatConfig flat = serve_config.empty() ? FlatConfig() : FlatConfig::load(serve_config);
      flat.apply_env_overrides("CATREC_", {"checkpoint", "catalog", "k", "port", "ttl_seconds",
                                           "max_sessions", "host"});
      if (!serve_checkpoint.empty()) flat.set("checkpoint", serve_checkpoint);
      if (!serve_catalog.empty()) flat.set("catalog", serve_catalog);
      if (!serve_host.empty()) flat.set("host", serve_host);
      if (port) flat.set("port", std::to_string(port));
      if (serve_k) flat.set("k", std::to_string(serve_k));
      return cmd_serve(flat);
    }
    if (*demo) return cmd_demo(demo_checkpoint, demo_catalog, demo_k);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
