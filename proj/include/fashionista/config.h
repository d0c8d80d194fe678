#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fashionista/epochs.h"
#include "fashionista/model.h"
#include "fashionista/tsne.h"

namespace fashionista {

/// Service settings. Loaded from a JSON object; keys mirror the field names
/// (see README). Relative paths are resolved against the config file's
/// directory.
struct ServiceConfig {
  std::filesystem::path catalog_path;
  std::filesystem::path interactions_path;
  std::filesystem::path model_path;   // loaded if present, else trained and written
  std::filesystem::path image_dir;    // served under /images when set
  std::filesystem::path ui_dir;       // served under / when set
  std::string host = "0.0.0.0";
  int port = 8080;
  Granularity epoch_granularity;
  Hyperparams hyperparams;
  TsneParams tsne;
  std::size_t map_sample_cap = 5000;
  std::uint64_t map_seed = 1;
  std::string cors_origin = "*";

  /// Throws BadConfig.
  void validate() const;
};

/// Throws BadConfig (unknown keys, wrong types) or IoError.
ServiceConfig load_config(const std::filesystem::path& path);
ServiceConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

}  // namespace fashionista
