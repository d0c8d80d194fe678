#include "fashionista/api.h"

#include <charconv>
#include <cmath>
#include <random>

#include "fashionista/error.h"

namespace fashionista {
namespace {

struct BadRequest {
  std::string message;
};

ApiResponse respond(const OrderedJson& body, int status = 200) { return {status, dump(body)}; }

ApiResponse error_response(ApiErrorCode code, const std::string& message) {
  return respond(api_error_json(code, message), api_error_status(code));
}

OrderedJson optional_json(const std::optional<std::string>& v) {
  return v ? OrderedJson(*v) : OrderedJson(nullptr);
}
OrderedJson optional_json(const std::optional<double>& v) {
  return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

const std::string* param(const ApiRequest& request, const std::string& name) {
  auto it = request.params.find(name);
  return it == request.params.end() ? nullptr : &it->second;
}

std::uint64_t parse_unsigned(const std::string& text, const char* name) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw BadRequest{std::string(name) + " must be a non-negative integer"};
  }
  return v;
}

double parse_number(const std::string& text, const char* name) {
  auto v = parse_double(text);
  if (!v || !std::isfinite(*v)) throw BadRequest{std::string(name) + " must be a finite number"};
  return *v;
}

std::vector<std::string> split_categories(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > start) out.push_back(text.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t check_epoch(const IndexSet& index, std::uint64_t epoch) {
  if (epoch >= index.num_epochs()) {
    throw BadRequest{"epoch must be in [0, " + std::to_string(index.num_epochs()) + ")"};
  }
  return static_cast<std::size_t>(epoch);
}

Query parse_query_body(const IndexSet& index, const std::string& body) {
  OrderedJson j;
  try {
    j = OrderedJson::parse(body);
  } catch (const OrderedJson::parse_error&) {
    throw BadRequest{"body must be valid JSON"};
  }
  if (!j.is_object()) throw BadRequest{"body must be a JSON object"};
  for (const auto& [key, value] : j.items()) {
    if (key != "categories" && key != "item_id" && key != "k" && key != "alpha" && key != "epoch") {
      throw BadRequest{"unknown field '" + key + "'"};
    }
  }
  Query q;
  auto id = j.find("item_id");
  if (id == j.end() || !id->is_string()) throw BadRequest{"item_id (string) is required"};
  q.item_id = id->get<std::string>();
  if (auto c = j.find("categories"); c != j.end() && !c->is_null()) {
    if (!c->is_array()) throw BadRequest{"categories must be an array of strings"};
    for (const auto& name : *c) {
      if (!name.is_string()) throw BadRequest{"categories must be an array of strings"};
      q.categories.push_back(name.get<std::string>());
    }
  }
  if (auto k = j.find("k"); k != j.end()) {
    if (!k->is_number_integer()) throw BadRequest{"k must be an integer"};
    const auto v = k->get<std::int64_t>();
    if (v < 1 || v > static_cast<std::int64_t>(Api::kMaxK)) {
      throw BadRequest{"k must be in [1, " + std::to_string(Api::kMaxK) + "]"};
    }
    q.k = static_cast<std::size_t>(v);
  }
  if (auto a = j.find("alpha"); a != j.end()) {
    if (!a->is_number()) throw BadRequest{"alpha must be a number"};
    q.alpha = a->get<double>();
    if (!(q.alpha >= 0.0 && q.alpha <= 1.0)) throw BadRequest{"alpha must be in [0, 1]"};
  }
  if (auto e = j.find("epoch"); e != j.end() && !e->is_null()) {
    if (!e->is_number_integer() || e->get<std::int64_t>() < 0) {
      throw BadRequest{"epoch must be a non-negative integer"};
    }
    q.epoch = check_epoch(index, e->get<std::uint64_t>());
  }
  return q;
}

}  // namespace

const char* api_error_name(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::kUnknownItem: return "unknown_item";
    case ApiErrorCode::kBadRequest: return "bad_request";
    case ApiErrorCode::kNoCandidates: return "no_candidates";
    case ApiErrorCode::kInternal: return "internal";
  }
  return "internal";
}

int api_error_status(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::kUnknownItem: return 404;
    case ApiErrorCode::kBadRequest: return 400;
    case ApiErrorCode::kNoCandidates: return 200;
    case ApiErrorCode::kInternal: return 500;
  }
  return 500;
}

OrderedJson api_error_json(ApiErrorCode code, const std::string& message) {
  OrderedJson err;
  err["code"] = api_error_name(code);
  err["message"] = message;
  OrderedJson j;
  j["error"] = std::move(err);
  return j;
}

std::string dump(const OrderedJson& j) { return j.dump(); }

OrderedJson item_metadata_json(const Item& item) {
  OrderedJson j;
  j["categories"] = item.categories;
  j["brand"] = optional_json(item.brand);
  j["price"] = optional_json(item.price);
  j["rating"] = optional_json(item.rating);
  j["image_ref"] = optional_json(item.image_ref);
  return j;
}

OrderedJson neighbors_json(const IndexSet& index, const QueryResult& result) {
  OrderedJson list = OrderedJson::array();
  for (const auto& e : result.entries) {
    OrderedJson n;
    n["item_id"] = e.item_id;
    n["distance"] = e.distance;
    n["fash_score"] = e.fash_score;
    n["fash_rank"] = e.fash_rank;
    n["x"] = e.coords.x;
    n["y"] = e.coords.y;
    n["approx_coords"] = e.coords.approx;
    n["metadata"] = item_metadata_json(index.catalog()[e.item_index]);
    list.push_back(std::move(n));
  }
  return list;
}

OrderedJson trend_json(const IndexSet& index, std::string_view item_id) {
  OrderedJson points = OrderedJson::array();
  std::size_t e = 0;
  for (const auto& t : trend_lookup(index, item_id)) {
    OrderedJson p;
    p["epoch"] = e++;
    p["label"] = t.label;
    p["score"] = t.score;
    p["percentile"] = t.percentile;
    points.push_back(std::move(p));
  }
  return points;
}

OrderedJson autocomplete_json(std::string_view prefix, const std::vector<Completion>& results) {
  OrderedJson list = OrderedJson::array();
  for (const auto& c : results) {
    OrderedJson r;
    r["item_id"] = c.item_id;
    r["image_ref"] = c.image_ref;
    list.push_back(std::move(r));
  }
  OrderedJson j;
  j["prefix"] = prefix;
  j["results"] = std::move(list);
  return j;
}

OrderedJson query_json(const IndexSet& index, const Query& query, const QueryResult& result) {
  OrderedJson echo;
  echo["item_id"] = query.item_id;
  echo["categories"] = query.categories;
  echo["k"] = query.k;
  echo["alpha"] = query.alpha;
  echo["epoch"] = result.epoch;
  OrderedJson j;
  j["query"] = std::move(echo);
  j["epoch_label"] = index.model().epochs.labels[result.epoch];
  j["neighbors"] = neighbors_json(index, result);
  j["trend"] = trend_json(index, query.item_id);
  if (result.empty()) {
    j["error"] = api_error_json(ApiErrorCode::kNoCandidates,
                                "no item passes the category and fashionability filters")["error"];
  }
  return j;
}

OrderedJson item_json(const IndexSet& index, std::string_view item_id) {
  const std::size_t i = index.item_index(item_id);
  const Item& item = index.catalog()[i];
  OrderedJson j;
  j["item_id"] = item.id;
  const OrderedJson metadata = item_metadata_json(item);
  for (const auto& [key, value] : metadata.items()) j[key] = value;
  const auto& p = index.placement(i);
  j["x"] = p.x;
  j["y"] = p.y;
  j["approx_coords"] = p.approx;
  return j;
}

OrderedJson map_json(const IndexSet& index, std::size_t epoch, const std::vector<MapPoint>& points) {
  OrderedJson list = OrderedJson::array();
  for (const auto& p : points) {
    OrderedJson m;
    m["item_id"] = p.item_id;
    m["x"] = p.x;
    m["y"] = p.y;
    m["fash_percentile"] = p.fash_percentile;
    list.push_back(std::move(m));
  }
  OrderedJson j;
  j["epoch"] = epoch;
  j["epoch_label"] = index.model().epochs.labels[epoch];
  j["points"] = std::move(list);
  return j;
}

OrderedJson hotspot_json(const IndexSet& index, double quantile, std::optional<std::uint64_t> seed,
                         const Hotspot& hotspot) {
  OrderedJson j;
  j["item_id"] = hotspot.item_id;
  j["quantile"] = quantile;
  j["seed"] = seed ? OrderedJson(*seed) : OrderedJson(nullptr);
  j["epoch"] = hotspot.neighborhood.epoch;
  j["neighbors"] = neighbors_json(index, hotspot.neighborhood);
  return j;
}

void Api::publish(std::shared_ptr<const IndexSet> snapshot) {
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const IndexSet> Api::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

ApiResponse Api::handle(const ApiRequest& request) const {
  const auto& path = request.path;
  if (path == "/healthz") return healthz();
  const auto snap = snapshot();
  if (!snap) return respond(api_error_json(ApiErrorCode::kInternal, "index is still building"), 503);
  const IndexSet& index = *snap;
  try {
    const bool get = request.method == "GET";
    if (path == "/query") {
      if (request.method != "POST") throw BadRequest{"/query expects POST"};
      return query(index, request);
    }
    if (!get) throw BadRequest{path + " expects GET"};
    if (path == "/autocomplete") return autocomplete(index, request);
    if (path == "/map") return map(index, request);
    if (path == "/feeling-fashionable") return feeling_fashionable(index, request);
    if (path.starts_with("/trend/")) return trend(index, std::string_view(path).substr(7));
    if (path.starts_with("/item/")) return item(index, std::string_view(path).substr(6));
    return error_response(ApiErrorCode::kBadRequest, "no such endpoint: " + path);
  } catch (const BadRequest& e) {
    return error_response(ApiErrorCode::kBadRequest, e.message);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kUnknownItem: return error_response(ApiErrorCode::kUnknownItem, e.what());
      case ErrorCode::kInvalidSpec:
      case ErrorCode::kInvalidViewport:
      case ErrorCode::kEpochOutOfRange: return error_response(ApiErrorCode::kBadRequest, e.what());
      default: return error_response(ApiErrorCode::kInternal, e.what());
    }
  } catch (const std::exception& e) {
    return error_response(ApiErrorCode::kInternal, e.what());
  }
}

ApiResponse Api::healthz() const {
  const auto snap = snapshot();
  OrderedJson j;
  if (!snap) {
    j["status"] = "starting";
    return respond(j, 503);
  }
  j["status"] = "ok";
  j["items"] = snap->catalog().size();
  j["epochs"] = snap->num_epochs();
  return respond(j);
}

ApiResponse Api::autocomplete(const IndexSet& index, const ApiRequest& request) const {
  const std::string* prefix = param(request, "prefix");
  if (!prefix) throw BadRequest{"prefix parameter is required"};
  std::size_t limit = kDefaultAutocompleteLimit;
  if (const auto* l = param(request, "limit")) {
    const auto v = parse_unsigned(*l, "limit");
    if (v < 1 || v > kMaxAutocompleteLimit) {
      throw BadRequest{"limit must be in [1, " + std::to_string(kMaxAutocompleteLimit) + "]"};
    }
    limit = static_cast<std::size_t>(v);
  }
  return respond(autocomplete_json(*prefix, fashionista::autocomplete(index, *prefix, limit)));
}

ApiResponse Api::query(const IndexSet& index, const ApiRequest& request) const {
  const Query q = parse_query_body(index, request.body);
  return respond(query_json(index, q, knn_query(index, q)));
}

ApiResponse Api::trend(const IndexSet& index, std::string_view item_id) const {
  OrderedJson j;
  j["item_id"] = item_id;
  j["trend"] = trend_json(index, item_id);
  return respond(j);
}

ApiResponse Api::item(const IndexSet& index, std::string_view item_id) const {
  return respond(item_json(index, item_id));
}

ApiResponse Api::map(const IndexSet& index, const ApiRequest& request) const {
  Viewport v;
  const std::pair<const char*, double*> bounds[] = {
      {"x_min", &v.x_min}, {"x_max", &v.x_max}, {"y_min", &v.y_min}, {"y_max", &v.y_max}};
  for (const auto& [name, dst] : bounds) {
    const auto* text = param(request, name);
    if (!text) throw BadRequest{std::string(name) + " parameter is required"};
    *dst = parse_number(*text, name);
  }
  std::size_t epoch = index.latest_epoch();
  if (const auto* e = param(request, "epoch")) epoch = check_epoch(index, parse_unsigned(*e, "epoch"));
  return respond(map_json(index, epoch, map_slice(index, v, epoch)));
}

ApiResponse Api::feeling_fashionable(const IndexSet& index, const ApiRequest& request) const {
  std::vector<std::string> categories;
  if (const auto* c = param(request, "categories")) categories = split_categories(*c);
  double quantile = kDefaultHotspotQuantile;
  if (const auto* q = param(request, "quantile")) {
    quantile = parse_number(*q, "quantile");
    if (quantile < 0.0 || quantile > 1.0) throw BadRequest{"quantile must be in [0, 1]"};
  }
  std::optional<std::uint64_t> seed;
  if (const auto* s = param(request, "seed")) seed = parse_unsigned(*s, "seed");
  const std::uint64_t draw_seed = seed ? *seed : std::random_device{}();
  try {
    return respond(hotspot_json(index, quantile, seed,
                                random_hotspot(index, categories, quantile, draw_seed)));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoCandidates) throw;
    OrderedJson j;
    j["item_id"] = nullptr;
    j["quantile"] = quantile;
    j["seed"] = seed ? OrderedJson(*seed) : OrderedJson(nullptr);
    j["epoch"] = index.latest_epoch();
    j["neighbors"] = OrderedJson::array();
    j["error"] = api_error_json(ApiErrorCode::kNoCandidates, e.what())["error"];
    return respond(j);
  }
}

}  // namespace fashionista
