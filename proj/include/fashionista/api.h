#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <json.hpp>

#include "fashionista/index.h"

namespace fashionista {

using OrderedJson = nlohmann::ordered_json;

/// Transport-independent request. `path` excludes the query string.
struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Error codes exposed on the wire, with their HTTP statuses:
///   unknown_item 404, bad_request 400, no_candidates 200 (empty result), internal 500.
enum class ApiErrorCode { kUnknownItem, kBadRequest, kNoCandidates, kInternal };
const char* api_error_name(ApiErrorCode code);
int api_error_status(ApiErrorCode code);
OrderedJson api_error_json(ApiErrorCode code, const std::string& message);

// Response encoders. Field order is fixed; see README for the schema.
OrderedJson item_metadata_json(const Item& item);
OrderedJson neighbors_json(const IndexSet& index, const QueryResult& result);
OrderedJson trend_json(const IndexSet& index, std::string_view item_id);
OrderedJson autocomplete_json(std::string_view prefix, const std::vector<Completion>& results);
OrderedJson query_json(const IndexSet& index, const Query& query, const QueryResult& result);
OrderedJson item_json(const IndexSet& index, std::string_view item_id);
OrderedJson map_json(const IndexSet& index, std::size_t epoch, const std::vector<MapPoint>& points);
OrderedJson hotspot_json(const IndexSet& index, double quantile, std::optional<std::uint64_t> seed,
                         const Hotspot& hotspot);

std::string dump(const OrderedJson& j);

/// Request router over an immutable IndexSet snapshot. handle() is safe to
/// call from many threads; publish() swaps the snapshot atomically with
/// respect to in-flight requests, which keep the snapshot they started with.
class Api {
 public:
  static constexpr std::size_t kDefaultAutocompleteLimit = 10;
  static constexpr std::size_t kMaxAutocompleteLimit = 50;
  static constexpr std::size_t kMaxK = 500;
  static constexpr double kDefaultHotspotQuantile = 0.9;

  Api() = default;
  explicit Api(std::shared_ptr<const IndexSet> snapshot) : snapshot_(std::move(snapshot)) {}

  void publish(std::shared_ptr<const IndexSet> snapshot);
  std::shared_ptr<const IndexSet> snapshot() const;
  bool ready() const { return snapshot() != nullptr; }

  ApiResponse handle(const ApiRequest& request) const;

 private:
  ApiResponse healthz() const;
  ApiResponse autocomplete(const IndexSet& index, const ApiRequest& request) const;
  ApiResponse query(const IndexSet& index, const ApiRequest& request) const;
  ApiResponse trend(const IndexSet& index, std::string_view item_id) const;
  ApiResponse item(const IndexSet& index, std::string_view item_id) const;
  ApiResponse map(const IndexSet& index, const ApiRequest& request) const;
  ApiResponse feeling_fashionable(const IndexSet& index, const ApiRequest& request) const;

  mutable std::mutex mutex_;
  std::shared_ptr<const IndexSet> snapshot_;
};

}  // namespace fashionista
