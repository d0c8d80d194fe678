// fashionista: corpus generation, training, map export and the HTTP service.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <spdlog/spdlog.h>
#include <thread>

#include "fashionista/api.h"
#include "fashionista/config.h"
#include "fashionista/error.h"
#include "fashionista/model_io.h"
#include "fashionista/server.h"
#include "fashionista/synthetic.h"

namespace {

using namespace fashionista;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::vector<double> parse_slopes(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto v = parse_double(tok);
    if (!v) throw CLI::ValidationError("--trend-slopes", "not a number: " + tok);
    out.push_back(*v);
  }
  return out;
}

std::filesystem::path resolve_config_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FASHIONISTA_CONFIG"); env && *env) return env;
  throw Error(ErrorCode::kBadConfig, "no config: pass --config or set FASHIONISTA_CONFIG");
}

int run_serve(const std::string& config_flag, bool force_train, std::optional<int> port,
              std::optional<std::uint64_t> seed) {
  ServiceConfig config;
  try {
    config = load_config(resolve_config_path(config_flag));
    if (port) config.port = *port;
    if (seed) {
      config.hyperparams.seed = *seed;
      config.tsne.seed = *seed;
      config.map_seed = *seed;
    }
    config.validate();
  } catch (const std::exception& e) {
    spdlog::critical("startup failed at stage 'config': {}", e.what());
    return 2;
  }

  Api api;
  HttpServer server(api, config);
  try {
    server.bind(config.host, config.port);
    server.start();
    spdlog::info("listening on {}:{} (not ready until indices are built)", config.host, config.port);
    StartupReport report;
    api.publish(build_snapshot(config, {force_train}, &report));
    spdlog::info("ready: model {}", report.model_source);
  } catch (const StartupError& e) {
    spdlog::critical("{}", e.what());
    return 2;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  spdlog::info("shutting down");
  server.stop();
  return 0;
}

struct GenerateArgs {
  std::filesystem::path out = "corpus";
  SyntheticSpec spec;
  std::string slopes = "0.5,-0.5";
  bool thumbnails = true;
  std::uint64_t iterations = 300000;
};

int run_generate(GenerateArgs args) {
  args.spec.trend_slopes = parse_slopes(args.slopes);
  args.spec.trend_slopes.resize(args.spec.style_dim, 0.0);
  const auto corpus = generate_synthetic(args.spec);
  std::filesystem::create_directories(args.out);
  save_catalog(args.out / "catalog.tsv", corpus.catalog);
  save_interactions(args.out / "interactions.tsv", corpus.interactions);
  {
    std::ofstream truth(args.out / "planted_truth.txt");
    write_planted_truth(truth, corpus.truth);
  }
  if (args.thumbnails) write_placeholder_thumbnails(args.out / "images", corpus.catalog, corpus.truth);

  nlohmann::ordered_json config;
  config["catalog_path"] = "catalog.tsv";
  config["interactions_path"] = "interactions.tsv";
  config["model_path"] = "model.fshm";
  config["image_dir"] = "images";
  config["host"] = "127.0.0.1";
  config["port"] = 8080;
  config["epoch_granularity"] = "calendar_year";
  config["hyperparams"] = {{"iterations", args.iterations}, {"seed", args.spec.seed}};
  config["map_sample_cap"] = 5000;
  std::ofstream(args.out / "config.json") << config.dump(2) << '\n';

  std::cout << "wrote " << corpus.catalog.size() << " items, " << corpus.interactions.size()
            << " interactions to " << args.out.string() << '\n';
  return 0;
}

int run_train(const std::string& config_flag, bool evaluate) {
  const ServiceConfig config = load_config(resolve_config_path(config_flag));
  const Catalog catalog = load_catalog(config.catalog_path);
  const auto interactions = load_interactions(config.interactions_path, catalog);
  const EpochTable epochs = segment_epochs(interactions, config.epoch_granularity);
  const auto t0 = std::chrono::steady_clock::now();
  if (evaluate) {
    const auto split = split_leave_last_out(interactions);
    const auto model = train(catalog, split.train, epochs, config.hyperparams);
    std::cout << "held-out AUC: " << auc_evaluate(model, split.heldout, catalog, split.train)
              << " (" << split.heldout.size() << " held-out interactions)\n";
  }
  const auto model = train(catalog, interactions, epochs, config.hyperparams);
  save_model(config.model_path, model);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "trained on " << interactions.size() << " interactions, " << epochs.size()
            << " epochs in " << secs << "s; saved " << config.model_path.string() << '\n';
  return 0;
}

int run_export_map(const std::string& config_flag, const std::filesystem::path& out) {
  const ServiceConfig config = load_config(resolve_config_path(config_flag));
  const auto snapshot = build_snapshot(config, {});
  std::ofstream file(out);
  for (std::size_t i : snapshot->mapped_items()) {
    const auto& p = snapshot->placement(i);
    file << snapshot->catalog()[i].id << '\t' << format_double(p.x) << '\t' << format_double(p.y)
         << '\n';
  }
  std::cout << "wrote " << snapshot->mapped_items().size() << " map points to " << out.string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fashion-aware visual similarity exploration"};
  app.require_subcommand(1);

  std::string config_path;
  bool force_train = false;
  std::optional<int> port;
  std::optional<std::uint64_t> seed;
  auto* serve = app.add_subcommand("serve", "Load or train the model, build indices, serve HTTP");
  serve->add_option("--config", config_path, "Config file (default: $FASHIONISTA_CONFIG)");
  serve->add_flag("--train", force_train, "Retrain even if a model file exists");
  serve->add_option("--port", port, "Override the configured port")->check(CLI::Range(1, 65535));
  serve->add_option("--seed", seed, "Override training, t-SNE and map sampling seeds");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus with planted structure");
  generate->add_option("--out", gen.out, "Output directory");
  generate->add_option("--items", gen.spec.num_items);
  generate->add_option("--users", gen.spec.num_users);
  generate->add_option("--interactions", gen.spec.num_interactions);
  generate->add_option("--feature-dim", gen.spec.feature_dim);
  generate->add_option("--style-dim", gen.spec.style_dim);
  generate->add_option("--epochs", gen.spec.num_epochs);
  generate->add_option("--start-year", gen.spec.start_year);
  generate->add_option("--categories", gen.spec.num_categories);
  generate->add_option("--trend-slopes", gen.slopes, "Comma-separated drift per style dimension");
  generate->add_option("--seed", gen.spec.seed);
  generate->add_option("--train-iterations", gen.iterations, "SGD steps written to config.json");
  generate->add_flag("!--no-thumbnails", gen.thumbnails, "Skip placeholder thumbnails");

  bool evaluate = false;
  auto* train_cmd = app.add_subcommand("train", "Train and save the model named in the config");
  train_cmd->add_option("--config", config_path);
  train_cmd->add_flag("--eval", evaluate, "Also report leave-last-out AUC");

  std::filesystem::path map_out = "map.tsv";
  auto* export_map = app.add_subcommand("export-map", "Write item_id<TAB>x<TAB>y for mapped items");
  export_map->add_option("--config", config_path);
  export_map->add_option("--out", map_out);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve) return run_serve(config_path, force_train, port, seed);
    if (*generate) return run_generate(gen);
    if (*train_cmd) return run_train(config_path, evaluate);
    if (*export_map) return run_export_map(config_path, map_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
