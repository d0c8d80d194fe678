#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fashionista {

/// One catalog entry. `features` holds the raw visual feature vector f_i.
struct Item {
  std::string id;
  std::vector<std::string> categories;  // sorted, unique, non-empty
  std::optional<std::string> brand;
  std::optional<double> price;
  std::optional<double> rating;
  std::optional<std::string> image_ref;
  std::vector<double> features;

  friend bool operator==(const Item&, const Item&) = default;
};

/// Ordered item list with id lookup. Item index = position in load order.
class Catalog {
 public:
  Catalog() = default;

  /// Validates and appends. Throws DuplicateId, InconsistentFeatureDim,
  /// MalformedRecord.
  void add(Item item);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  const Item& operator[](std::size_t index) const { return items_[index]; }
  const std::vector<Item>& items() const noexcept { return items_; }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws UnknownItem.
  std::size_t index_of(std::string_view id) const;

  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::size_t feature_dim_ = 0;
};

/// Parses the tab-separated catalog format:
///   id \t cat1|cat2 \t brand \t price \t rating \t image_ref \t f1,f2,...,fF
/// Empty fields mean "absent" for the optional columns. Blank lines are
/// skipped. Errors carry the 1-based line number.
Catalog parse_catalog(std::istream& in);
Catalog load_catalog(const std::filesystem::path& path);

/// Canonical form: categories sorted, numbers in shortest round-trip notation.
void write_catalog(std::ostream& out, const Catalog& catalog);
void save_catalog(const std::filesystem::path& path, const Catalog& catalog);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
/// Strict full-field parse; returns nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

}  // namespace fashionista
