#include "fashionista/index.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <tuple>

#include "fashionista/error.h"
#include "fashionista/rng.h"

namespace fashionista {
namespace {

constexpr double kJitterFraction = 0.005;
constexpr std::size_t kHotspotK = 20;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::size_t resolve_epoch(const IndexSet& index, std::optional<std::size_t> epoch) {
  const std::size_t e = epoch.value_or(index.latest_epoch());
  if (e >= index.num_epochs()) {
    throw Error(ErrorCode::kEpochOutOfRange, "epoch " + std::to_string(e) + " not in [0, " +
                                                 std::to_string(index.num_epochs()) + ")");
  }
  return e;
}

void validate_query(const Query& q) {
  if (q.k == 0) throw Error(ErrorCode::kInvalidSpec, "k must be at least 1");
  if (!(q.alpha >= 0.0 && q.alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "alpha must lie in [0, 1]");
  }
}

// Calls fn(item) once for each candidate in the category union (all items when
// `categories` is empty), in no particular order.
template <typename Fn>
void for_each_candidate(const IndexSet& index, std::span<const std::string> categories, Fn&& fn) {
  const std::size_t n = index.catalog().size();
  if (categories.empty()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<const std::vector<std::uint32_t>*> lists;
  for (const auto& name : categories) {
    auto it = index.categories().find(name);
    if (it != index.categories().end() &&
        std::find(lists.begin(), lists.end(), &it->second) == lists.end()) {
      lists.push_back(&it->second);
    }
  }
  if (lists.size() == 1) {
    for (auto i : *lists.front()) fn(i);
    return;
  }
  std::vector<bool> seen(n, false);
  for (const auto* list : lists) {
    for (auto i : *list) {
      if (!seen[i]) {
        seen[i] = true;
        fn(i);
      }
    }
  }
}

struct Candidate {
  double sq_distance;
  std::uint32_t id_rank;
  std::size_t item;
};

bool closer(const Candidate& a, const Candidate& b) {
  return std::tie(a.sq_distance, a.id_rank) < std::tie(b.sq_distance, b.id_rank);
}

QueryResult finish(const IndexSet& index, std::size_t query_item, std::size_t epoch,
                   std::vector<Candidate>& nearest) {
  QueryResult result;
  result.query_index = query_item;
  result.epoch = epoch;
  result.entries.reserve(nearest.size());
  for (const auto& c : nearest) {
    QueryEntry e;
    e.item_index = c.item;
    e.item_id = index.catalog()[c.item].id;
    e.distance = std::sqrt(c.sq_distance);
    e.fash_score = index.trends().scores(c.item, epoch);
    e.coords = index.placement(c.item);
    result.entries.push_back(std::move(e));
  }
  std::vector<std::size_t> order(result.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = result.entries[a];
    const auto& eb = result.entries[b];
    if (ea.fash_score != eb.fash_score) return ea.fash_score > eb.fash_score;
    return index.id_rank(ea.item_index) < index.id_rank(eb.item_index);
  });
  for (std::size_t r = 0; r < order.size(); ++r) result.entries[order[r]].fash_rank = r + 1;
  return result;
}

struct PreparedQuery {
  std::size_t item;
  std::size_t epoch;
  double threshold;
};

PreparedQuery prepare(const IndexSet& index, const Query& query) {
  validate_query(query);
  const std::size_t item = index.item_index(query.item_id);
  const std::size_t epoch = resolve_epoch(index, query.epoch);
  return {item, epoch, index.trends().score_at_percentile(query.alpha, epoch)};
}

}  // namespace

double TrendIndex::score_at_percentile(double alpha, std::size_t epoch) const {
  const auto& s = sorted[epoch];
  const double pos = alpha * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return s[lo];
  return std::min(s[lo] + frac * (s[lo + 1] - s[lo]), s[lo + 1]);
}

double TrendIndex::percentile_of(double score, std::size_t epoch) const {
  const auto& s = sorted[epoch];
  if (s.size() <= 1) return 100.0;
  const auto count_le = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), score) - s.begin());
  if (count_le == 0) return 0.0;
  return 100.0 * static_cast<double>(count_le - 1) / static_cast<double>(s.size() - 1);
}

std::size_t IndexSet::item_index(std::string_view id) const {
  if (auto idx = trie_.lookup(id)) return *idx;
  throw Error(ErrorCode::kUnknownItem, "unknown item " + std::string(id));
}

std::vector<std::size_t> select_map_sample(const Catalog& catalog, std::size_t cap,
                                           std::uint64_t seed) {
  const std::size_t n = catalog.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (n <= cap) return all;

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) strata[catalog[i].categories.front()].push_back(i);

  struct Share {
    std::size_t quota;
    std::size_t remainder;  // scaled by n
    std::vector<std::size_t>* members;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (auto& [name, members] : strata) {
    const std::size_t scaled = cap * members.size();
    shares.push_back({scaled / n, scaled % n, &members});
    assigned += scaled / n;
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shares[a].remainder > shares[b].remainder;
  });
  for (std::size_t r = 0; assigned < cap; ++r, ++assigned) ++shares[order[r]].quota;

  Rng rng(seed);
  std::vector<std::size_t> sample;
  sample.reserve(cap);
  for (auto& share : shares) {
    auto& m = *share.members;
    for (std::size_t k = 0; k < share.quota; ++k) {
      std::swap(m[k], m[k + rng.below(m.size() - k)]);
      sample.push_back(m[k]);
    }
  }
  std::sort(sample.begin(), sample.end());
  return sample;
}

Matrix compute_style_points(const FashionModel& model, const Catalog& catalog) {
  Matrix theta(catalog.size(), model.visual_dim());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    style_position(model, catalog[i].features, theta.row(i));
  }
  return theta;
}

IndexSet build_indices(std::shared_ptr<const Catalog> catalog,
                       std::shared_ptr<const FashionModel> model, const Embedding2D& embedding,
                       std::vector<std::size_t> mapped_items) {
  if (!catalog || !model || catalog->empty()) {
    throw Error(ErrorCode::kInconsistentInputs, "index build needs a non-empty catalog and a model");
  }
  require_same_items(*model, *catalog);
  const std::size_t n = catalog->size();
  if (embedding.coords.rows() != mapped_items.size() || embedding.coords.cols() != 2 ||
      mapped_items.empty()) {
    throw Error(ErrorCode::kInconsistentInputs, "embedding rows do not match the mapped items");
  }
  if (!std::is_sorted(mapped_items.begin(), mapped_items.end()) ||
      std::adjacent_find(mapped_items.begin(), mapped_items.end()) != mapped_items.end() ||
      mapped_items.back() >= n) {
    throw Error(ErrorCode::kInconsistentInputs, "mapped items must be ascending catalog indices");
  }

  IndexSet index;
  index.catalog_ = std::move(catalog);
  index.model_ = std::move(model);
  const Catalog& cat = *index.catalog_;
  const FashionModel& fm = *index.model_;

  for (std::size_t i = 0; i < n; ++i) {
    index.trie_.insert(cat[i].id, i, cat[i].image_ref.value_or(""));
    for (const auto& c : cat[i].categories) {
      index.categories_[c].push_back(static_cast<std::uint32_t>(i));
    }
  }

  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return cat[a].id < cat[b].id; });
  index.id_rank_.resize(n);
  for (std::size_t r = 0; r < n; ++r) index.id_rank_[by_id[r]] = static_cast<std::uint32_t>(r);

  index.theta_ = compute_style_points(fm, cat);
  const std::size_t epochs = fm.num_epochs();
  TrendIndex& trends = index.trends_;
  trends.scores = Matrix(n, epochs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = 0; e < epochs; ++e) {
      trends.scores(i, e) = fashionability_at(fm, i, index.theta_.row(i), e);
    }
  }
  trends.sorted.resize(epochs);
  trends.quantiles = Matrix(epochs, 101);
  for (std::size_t e = 0; e < epochs; ++e) {
    auto& s = trends.sorted[e];
    s.resize(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = trends.scores(i, e);
    std::sort(s.begin(), s.end());
    for (std::size_t p = 0; p <= 100; ++p) {
      trends.quantiles(e, p) = trends.score_at_percentile(static_cast<double>(p) / 100.0, e);
    }
  }

  index.mapped_ = std::move(mapped_items);
  index.placements_.assign(n, MapPlacement{});
  std::vector<bool> on_map(n, false);
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (std::size_t r = 0; r < index.mapped_.size(); ++r) {
    const double x = embedding.coords(r, 0);
    const double y = embedding.coords(r, 1);
    index.placements_[index.mapped_[r]] = {x, y, false};
    on_map[index.mapped_[r]] = true;
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  }
  const double jitter_x = kJitterFraction * (x_hi - x_lo);
  const double jitter_y = kJitterFraction * (y_hi - y_lo);
  for (std::size_t i = 0; i < n; ++i) {
    if (on_map[i]) continue;
    std::size_t best = index.mapped_.front();
    double best_d = INFINITY;
    for (std::size_t m : index.mapped_) {
      const double d = squared_distance(index.theta_.row(i), index.theta_.row(m));
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    const std::uint64_t h1 = splitmix64(i);
    const std::uint64_t h2 = splitmix64(h1);
    const auto& anchor = index.placements_[best];
    index.placements_[i] = {anchor.x + (2.0 * unit_from_bits(h1) - 1.0) * jitter_x,
                            anchor.y + (2.0 * unit_from_bits(h2) - 1.0) * jitter_y, true};
  }
  return index;
}

std::vector<Completion> autocomplete(const IndexSet& index, std::string_view prefix,
                                     std::size_t limit) {
  return index.trie().complete(prefix, limit);
}

std::vector<std::size_t> filtered_candidates(const IndexSet& index, const Query& query) {
  const PreparedQuery pq = prepare(index, query);
  std::vector<std::size_t> out;
  for_each_candidate(index, query.categories, [&](std::size_t i) {
    if (i != pq.item && index.trends().scores(i, pq.epoch) >= pq.threshold) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
  return out;
}

QueryResult knn_query(const IndexSet& index, const Query& query) {
  const PreparedQuery pq = prepare(index, query);
  const auto origin = index.style_points().row(pq.item);
  const auto& scores = index.trends().scores;

  // Max-heap on (distance, id rank): the top is the worst of the current k.
  auto worse = [](const Candidate& a, const Candidate& b) { return closer(a, b); };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
  for_each_candidate(index, query.categories, [&](std::size_t i) {
    if (i == pq.item || scores(i, pq.epoch) < pq.threshold) return;
    const Candidate c{squared_distance(origin, index.style_points().row(i)), index.id_rank(i), i};
    if (heap.size() < query.k) {
      heap.push(c);
    } else if (closer(c, heap.top())) {
      heap.pop();
      heap.push(c);
    }
  });
  std::vector<Candidate> nearest(heap.size());
  for (auto it = nearest.rbegin(); it != nearest.rend(); ++it) {
    *it = heap.top();
    heap.pop();
  }
  return finish(index, pq.item, pq.epoch, nearest);
}

QueryResult knn_query_full_sort(const IndexSet& index, const Query& query) {
  const PreparedQuery pq = prepare(index, query);
  const auto origin = index.style_points().row(pq.item);
  std::vector<Candidate> all;
  for (std::size_t i : filtered_candidates(index, query)) {
    all.push_back({squared_distance(origin, index.style_points().row(i)), index.id_rank(i), i});
  }
  std::sort(all.begin(), all.end(), closer);
  if (all.size() > query.k) all.resize(query.k);
  return finish(index, pq.item, pq.epoch, all);
}

std::vector<TrendEntry> trend_lookup(const IndexSet& index, std::string_view item_id) {
  const std::size_t i = index.item_index(item_id);
  const auto& trends = index.trends();
  std::vector<TrendEntry> out;
  for (std::size_t e = 0; e < index.num_epochs(); ++e) {
    const double score = trends.scores(i, e);
    out.push_back({index.model().epochs.labels[e], score, trends.percentile_of(score, e)});
  }
  return out;
}

Hotspot random_hotspot(const IndexSet& index, std::span<const std::string> categories,
                       double quantile, std::uint64_t seed) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "quantile must lie in [0, 1]");
  }
  const std::size_t epoch = index.latest_epoch();
  const double threshold = index.trends().score_at_percentile(quantile, epoch);
  std::vector<std::size_t> pool;
  for_each_candidate(index, categories, [&](std::size_t i) {
    if (index.trends().scores(i, epoch) >= threshold) pool.push_back(i);
  });
  if (pool.empty()) {
    throw Error(ErrorCode::kNoCandidates, "no item in the selected categories reaches the quantile");
  }
  std::sort(pool.begin(), pool.end());
  Rng rng(seed);
  const std::size_t pick = pool[rng.below(pool.size())];

  Hotspot hot;
  hot.item_index = pick;
  hot.item_id = index.catalog()[pick].id;
  Query q;
  q.categories.assign(categories.begin(), categories.end());
  q.item_id = hot.item_id;
  q.k = kHotspotK;
  q.alpha = quantile;
  q.epoch = epoch;
  hot.neighborhood = knn_query(index, q);
  return hot;
}

std::vector<MapPoint> map_slice(const IndexSet& index, const Viewport& v,
                                std::optional<std::size_t> epoch) {
  const bool finite = std::isfinite(v.x_min) && std::isfinite(v.x_max) && std::isfinite(v.y_min) &&
                      std::isfinite(v.y_max);
  if (!finite || v.x_min > v.x_max || v.y_min > v.y_max) {
    throw Error(ErrorCode::kInvalidViewport, "viewport needs finite bounds with min <= max");
  }
  const std::size_t e = resolve_epoch(index, epoch);
  std::vector<MapPoint> out;
  for (std::size_t i : index.mapped_items()) {
    const auto& p = index.placement(i);
    if (p.x < v.x_min || p.x > v.x_max || p.y < v.y_min || p.y > v.y_max) continue;
    out.push_back({i, index.catalog()[i].id, p.x, p.y,
                   index.trends().percentile_of(index.trends().scores(i, e), e)});
  }
  return out;
}

}  // namespace fashionista
