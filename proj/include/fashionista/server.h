#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include "fashionista/api.h"
#include "fashionista/config.h"
#include "fashionista/index.h"

namespace httplib {
class Server;
}

namespace fashionista {

/// Fatal startup failure; `stage` names the step that failed
/// (config, catalog, interactions, epochs, model, embedding, index, bind).
class StartupError : public std::runtime_error {
 public:
  StartupError(std::string stage, const std::string& message)
      : std::runtime_error("startup failed at stage '" + stage + "': " + message),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct StartupOptions {
  bool force_train = false;
};

struct StartupReport {
  std::string model_source;  // "loaded" or "trained"
  std::string model_fallback_reason;  // why a present model file was not used
  std::size_t items = 0;
  std::size_t interactions = 0;
  std::size_t mapped_items = 0;
  double model_seconds = 0.0;
  double index_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Embeds the map sample with t-SNE and builds the IndexSet.
std::shared_ptr<const IndexSet> build_index_set(std::shared_ptr<const Catalog> catalog,
                                                std::shared_ptr<const FashionModel> model,
                                                const TsneParams& tsne, std::size_t map_sample_cap,
                                                std::uint64_t map_seed);

/// Load catalog and interactions, load the model file (or train and save it),
/// then build the index snapshot. Throws StartupError.
std::shared_ptr<const IndexSet> build_snapshot(const ServiceConfig& config,
                                               const StartupOptions& options,
                                               StartupReport* report = nullptr);

/// HTTP front end for an Api. Handlers run on the httplib worker pool.
class HttpServer {
 public:
  HttpServer(Api& api, const ServiceConfig& config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free port). Returns the bound port.
  /// Throws StartupError("bind").
  int bind(const std::string& host, int port);
  /// Serves on a background thread until stop().
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();

 private:
  Api& api_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace fashionista
