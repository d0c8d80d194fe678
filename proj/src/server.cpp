#include "fashionista/server.h"

#include <chrono>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "fashionista/error.h"
#include "fashionista/interactions.h"
#include "fashionista/model_io.h"

namespace fashionista {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StartupError&) {
    throw;
  } catch (const std::exception& e) {
    throw StartupError(name, e.what());
  }
}

}  // namespace

std::shared_ptr<const IndexSet> build_index_set(std::shared_ptr<const Catalog> catalog,
                                                std::shared_ptr<const FashionModel> model,
                                                const TsneParams& tsne, std::size_t map_sample_cap,
                                                std::uint64_t map_seed) {
  auto sample = select_map_sample(*catalog, map_sample_cap, map_seed);
  const Matrix theta = compute_style_points(*model, *catalog);
  Embedding2D embedding;
  if (sample.size() >= 4) {
    Matrix points(sample.size(), theta.cols());
    for (std::size_t r = 0; r < sample.size(); ++r) {
      std::copy(theta.row(sample[r]).begin(), theta.row(sample[r]).end(), points.row(r).begin());
    }
    embedding = tsne_embed(points, tsne);
  } else {
    // Too few points for t-SNE: lay them out on a line.
    embedding.coords = Matrix(sample.size(), 2);
    for (std::size_t r = 0; r < sample.size(); ++r) embedding.coords(r, 0) = static_cast<double>(r);
  }
  return std::make_shared<const IndexSet>(
      build_indices(std::move(catalog), std::move(model), embedding, std::move(sample)));
}

std::shared_ptr<const IndexSet> build_snapshot(const ServiceConfig& config,
                                               const StartupOptions& options,
                                               StartupReport* report) {
  const auto start = Clock::now();
  StartupReport rep;
  stage("config", [&] {
    config.validate();
    return 0;
  });
  auto catalog = stage("catalog", [&] {
    auto c = std::make_shared<const Catalog>(load_catalog(config.catalog_path));
    if (c->empty()) throw Error(ErrorCode::kEmptyInput, "catalog is empty");
    return c;
  });
  spdlog::info("catalog: {} items, F = {}", catalog->size(), catalog->feature_dim());
  rep.items = catalog->size();

  const auto model_start = Clock::now();
  std::shared_ptr<const FashionModel> model;
  if (!options.force_train && std::filesystem::exists(config.model_path)) {
    try {
      auto loaded = load_model(config.model_path);
      require_same_items(loaded, *catalog);
      model = std::make_shared<const FashionModel>(std::move(loaded));
      rep.model_source = "loaded";
      spdlog::info("model loaded from {}", config.model_path.string());
    } catch (const Error& e) {
      rep.model_fallback_reason = e.what();
      spdlog::warn("model file {} not usable ({}); retraining", config.model_path.string(),
                   e.what());
    }
  }
  if (!model) {
    auto interactions = stage("interactions", [&] {
      if (!std::filesystem::exists(config.interactions_path)) {
        throw Error(ErrorCode::kIoError, "no usable model and no interaction file at " +
                                             config.interactions_path.string());
      }
      return load_interactions(config.interactions_path, *catalog);
    });
    rep.interactions = interactions.size();
    const auto epochs = stage("epochs", [&] {
      return segment_epochs(interactions, config.epoch_granularity);
    });
    spdlog::info("training on {} interactions over {} epochs ({} SGD steps)", interactions.size(),
                 epochs.size(), config.hyperparams.iterations);
    model = stage("model", [&] {
      auto trained = std::make_shared<const FashionModel>(
          train(*catalog, interactions, epochs, config.hyperparams));
      save_model(config.model_path, *trained);
      return trained;
    });
    rep.model_source = "trained";
    spdlog::info("model trained and saved to {}", config.model_path.string());
  }
  rep.model_seconds = seconds_since(model_start);

  const auto index_start = Clock::now();
  auto snapshot = stage("embedding", [&] {
    return build_index_set(catalog, model, config.tsne, config.map_sample_cap, config.map_seed);
  });
  rep.index_seconds = seconds_since(index_start);
  rep.mapped_items = snapshot->mapped_items().size();
  rep.total_seconds = seconds_since(start);
  spdlog::info("indices built: {} items, {} on the map, {:.2f}s total", rep.items,
               rep.mapped_items, rep.total_seconds);
  if (report) *report = rep;
  return snapshot;
}

HttpServer::HttpServer(Api& api, const ServiceConfig& config)
    : api_(api), server_(std::make_unique<httplib::Server>()) {
  // The library default adds SO_REUSEPORT, which lets a second process share
  // an occupied port silently; a taken port must fail at bind time instead.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  // Responses are small; without this, Nagle plus delayed ACKs add ~40 ms.
  server_->set_tcp_nodelay(true);
  if (!config.image_dir.empty() && !server_->set_mount_point("/images", config.image_dir.string())) {
    spdlog::warn("image directory {} not found; thumbnails disabled", config.image_dir.string());
  }
  if (!config.ui_dir.empty() && !server_->set_mount_point("/", config.ui_dir.string())) {
    spdlog::warn("ui directory {} not found", config.ui_dir.string());
  }
  if (!config.cors_origin.empty()) {
    server_->set_default_headers({{"Access-Control-Allow-Origin", config.cors_origin}});
    server_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [key, value] : req.params) request.params.emplace(key, value);
    request.body = req.body;
    const ApiResponse response = api_.handle(request);
    res.status = response.status;
    res.set_content(response.body, "application/json");
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : server_->bind_to_port(host, port);
  if (bound < 0 || (port != 0 && !bound)) {
    throw StartupError("bind", "cannot bind " + host + ":" + std::to_string(port));
  }
  return port == 0 ? bound : port;
}

void HttpServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace fashionista
