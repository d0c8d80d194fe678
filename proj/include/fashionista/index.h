#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fashionista/catalog.h"
#include "fashionista/matrix.h"
#include "fashionista/model.h"
#include "fashionista/trie.h"
#include "fashionista/tsne.h"

namespace fashionista {

/// category name -> ascending, duplicate-free item indices
using CategoryIndex = std::map<std::string, std::vector<std::uint32_t>, std::less<>>;

/// Per-item fashionability for every epoch plus the per-epoch distribution.
struct TrendIndex {
  Matrix scores;                             // items x N
  std::vector<std::vector<double>> sorted;   // per epoch, ascending
  Matrix quantiles;                          // N x 101 cut-points

  /// Score at fraction `alpha` in [0, 1] of the epoch's distribution, with
  /// linear interpolation between order statistics (0 = min, 1 = max).
  double score_at_percentile(double alpha, std::size_t epoch) const;
  /// 100 * (#items scoring <= score, minus one) / (n - 1); 100 when n == 1.
  double percentile_of(double score, std::size_t epoch) const;
};

struct MapPlacement {
  double x = 0.0;
  double y = 0.0;
  bool approx = false;  // not embedded directly; placed next to its nearest mapped item

  friend bool operator==(const MapPlacement&, const MapPlacement&) = default;
};

struct Query {
  std::vector<std::string> categories;  // empty = all
  std::string item_id;
  std::size_t k = 10;
  double alpha = 0.0;                   // fashionability percentile threshold
  std::optional<std::size_t> epoch;     // default: latest
};

struct QueryEntry {
  std::size_t item_index = 0;
  std::string item_id;
  double distance = 0.0;
  double fash_score = 0.0;
  std::size_t fash_rank = 0;  // 1 = most fashionable among the returned entries
  MapPlacement coords;

  friend bool operator==(const QueryEntry&, const QueryEntry&) = default;
};

struct QueryResult {
  std::size_t query_index = 0;
  std::size_t epoch = 0;
  std::vector<QueryEntry> entries;  // ascending distance, ties by item id

  bool empty() const noexcept { return entries.empty(); }
};

struct TrendEntry {
  std::string label;
  double score = 0.0;
  double percentile = 0.0;
};

struct Viewport {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

struct MapPoint {
  std::size_t item_index = 0;
  std::string item_id;
  double x = 0.0;
  double y = 0.0;
  double fash_percentile = 0.0;

  friend bool operator==(const MapPoint&, const MapPoint&) = default;
};

struct Hotspot {
  std::size_t item_index = 0;
  std::string item_id;
  QueryResult neighborhood;
};

/// Immutable, read-only after construction; safe for concurrent queries.
class IndexSet {
 public:
  const Catalog& catalog() const noexcept { return *catalog_; }
  const FashionModel& model() const noexcept { return *model_; }
  const Trie& trie() const noexcept { return trie_; }
  const CategoryIndex& categories() const noexcept { return categories_; }
  const TrendIndex& trends() const noexcept { return trends_; }
  const Matrix& style_points() const noexcept { return theta_; }
  std::span<const std::size_t> mapped_items() const noexcept { return mapped_; }
  const MapPlacement& placement(std::size_t item) const { return placements_[item]; }
  /// Position of each item in ascending id order; used for tie-breaking.
  std::uint32_t id_rank(std::size_t item) const { return id_rank_[item]; }

  std::size_t num_epochs() const noexcept { return model_->num_epochs(); }
  std::size_t latest_epoch() const noexcept { return model_->num_epochs() - 1; }

  /// Throws UnknownItem.
  std::size_t item_index(std::string_view id) const;

 private:
  friend IndexSet build_indices(std::shared_ptr<const Catalog>,
                                std::shared_ptr<const FashionModel>, const Embedding2D&,
                                std::vector<std::size_t>);

  std::shared_ptr<const Catalog> catalog_;
  std::shared_ptr<const FashionModel> model_;
  Trie trie_;
  CategoryIndex categories_;
  TrendIndex trends_;
  Matrix theta_;  // items x K
  std::vector<std::size_t> mapped_;
  std::vector<MapPlacement> placements_;
  std::vector<std::uint32_t> id_rank_;
};

/// Items to embed on the 2D map. Everything when the catalog fits under `cap`;
/// otherwise a per-primary-category proportional sample (largest remainder),
/// drawn without replacement from Rng(seed). Returned ascending.
std::vector<std::size_t> select_map_sample(const Catalog& catalog, std::size_t cap,
                                           std::uint64_t seed);

/// Style positions theta_i = E f_i for every catalog item.
Matrix compute_style_points(const FashionModel& model, const Catalog& catalog);

/// `embedding.coords` row r belongs to `mapped_items[r]`. Items off the map
/// are placed at their nearest mapped item (style-space distance) plus a
/// deterministic jitter of at most 0.5% of the map extent per axis.
/// Throws InconsistentInputs.
IndexSet build_indices(std::shared_ptr<const Catalog> catalog,
                       std::shared_ptr<const FashionModel> model, const Embedding2D& embedding,
                       std::vector<std::size_t> mapped_items);

std::vector<Completion> autocomplete(const IndexSet& index, std::string_view prefix,
                                     std::size_t limit);

/// Bounded max-heap top-k over the filtered candidates. An empty result
/// means no candidate survived the filters. Throws UnknownItem, InvalidSpec
/// (k == 0 or alpha outside [0, 1]), EpochOutOfRange.
QueryResult knn_query(const IndexSet& index, const Query& query);

/// Same contract as knn_query, computed by sorting every candidate.
QueryResult knn_query_full_sort(const IndexSet& index, const Query& query);

/// Candidates that pass the category and alpha filters, before truncation,
/// ascending item index. The query item is excluded.
std::vector<std::size_t> filtered_candidates(const IndexSet& index, const Query& query);

/// Throws UnknownItem.
std::vector<TrendEntry> trend_lookup(const IndexSet& index, std::string_view item_id);

/// Uniform draw among items in `categories` whose latest-epoch score reaches
/// the `quantile` cut-point, plus their k = 20 neighborhood at alpha = quantile.
/// Throws NoCandidates, InvalidSpec.
Hotspot random_hotspot(const IndexSet& index, std::span<const std::string> categories,
                       double quantile, std::uint64_t seed);

/// Mapped items inside the closed rectangle, ascending item index.
/// Throws InvalidViewport, EpochOutOfRange.
std::vector<MapPoint> map_slice(const IndexSet& index, const Viewport& viewport,
                                std::optional<std::size_t> epoch = std::nullopt);

}  // namespace fashionista
