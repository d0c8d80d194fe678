#include "fashionista/config.h"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fashionista/error.h"

namespace fashionista {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kBadConfig, what); }

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad(std::string("config key '") + key + "' has the wrong type");
  }
}

void read_path(const json& obj, const char* key, const std::filesystem::path& base,
               std::filesystem::path& out) {
  std::string text;
  read_key(obj, key, text);
  if (text.empty()) return;
  std::filesystem::path p(text);
  out = p.is_absolute() ? p : base / p;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) bad(std::string("unknown config key '") + key + "' in " + where);
  }
}

}  // namespace

void ServiceConfig::validate() const {
  if (catalog_path.empty()) bad("catalog_path is required");
  if (interactions_path.empty()) bad("interactions_path is required");
  if (model_path.empty()) bad("model_path is required");
  if (port < 1 || port > 65535) bad("port must be in [1, 65535]");
  if (map_sample_cap < 4) bad("map_sample_cap must be at least 4");
  try {
    hyperparams.validate();
    tsne.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
}

ServiceConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) bad("config must be a JSON object");
  reject_unknown(root,
                 {"catalog_path", "interactions_path", "model_path", "image_dir", "ui_dir", "host",
                  "port", "epoch_granularity", "hyperparams", "tsne", "map_sample_cap", "map_seed",
                  "cors_origin"},
                 "config");

  ServiceConfig cfg;
  read_path(root, "catalog_path", base_dir, cfg.catalog_path);
  read_path(root, "interactions_path", base_dir, cfg.interactions_path);
  read_path(root, "model_path", base_dir, cfg.model_path);
  read_path(root, "image_dir", base_dir, cfg.image_dir);
  read_path(root, "ui_dir", base_dir, cfg.ui_dir);
  read_key(root, "host", cfg.host);
  read_key(root, "port", cfg.port);
  read_key(root, "map_sample_cap", cfg.map_sample_cap);
  read_key(root, "map_seed", cfg.map_seed);
  read_key(root, "cors_origin", cfg.cors_origin);
  if (root.contains("epoch_granularity")) {
    std::string g;
    read_key(root, "epoch_granularity", g);
    try {
      cfg.epoch_granularity = Granularity::parse(g);
    } catch (const Error& e) {
      bad(e.what());
    }
  }
  if (auto it = root.find("hyperparams"); it != root.end()) {
    if (!it->is_object()) bad("hyperparams must be an object");
    reject_unknown(*it,
                   {"visual_dim", "latent_dim", "learning_rate", "reg_lambda", "reg_embed",
                    "reg_epoch_bias", "iterations", "seed"},
                   "hyperparams");
    auto& hp = cfg.hyperparams;
    read_key(*it, "visual_dim", hp.visual_dim);
    read_key(*it, "latent_dim", hp.latent_dim);
    read_key(*it, "learning_rate", hp.learning_rate);
    read_key(*it, "reg_lambda", hp.reg_lambda);
    read_key(*it, "reg_embed", hp.reg_embed);
    read_key(*it, "reg_epoch_bias", hp.reg_epoch_bias);
    read_key(*it, "iterations", hp.iterations);
    read_key(*it, "seed", hp.seed);
  }
  if (auto it = root.find("tsne"); it != root.end()) {
    if (!it->is_object()) bad("tsne must be an object");
    reject_unknown(*it,
                   {"perplexity", "learning_rate", "iterations", "early_exaggeration",
                    "exaggeration_iterations", "initial_momentum", "final_momentum", "seed"},
                   "tsne");
    auto& t = cfg.tsne;
    read_key(*it, "perplexity", t.perplexity);
    read_key(*it, "learning_rate", t.learning_rate);
    read_key(*it, "iterations", t.iterations);
    read_key(*it, "early_exaggeration", t.early_exaggeration);
    read_key(*it, "exaggeration_iterations", t.exaggeration_iterations);
    read_key(*it, "initial_momentum", t.initial_momentum);
    read_key(*it, "final_momentum", t.final_momentum);
    read_key(*it, "seed", t.seed);
  }
  cfg.validate();
  return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace fashionista
