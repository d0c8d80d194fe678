#include "fashionista/catalog.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "fashionista/error.h"

namespace fashionista {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

bool valid_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) != 0;
  });
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line) + ": " + what);
}

std::optional<double> optional_number(std::string_view field, std::size_t line,
                                      const char* name) {
  if (field.empty()) return std::nullopt;
  auto value = parse_double(field);
  if (!value || !std::isfinite(*value)) malformed(line, std::string("bad ") + name);
  return value;
}

void check_item(const Item& item) {
  if (!valid_id(item.id)) {
    throw Error(ErrorCode::kMalformedRecord, "item id must be non-empty alphanumeric: '" +
                                                 item.id + "'");
  }
  if (item.categories.empty()) {
    throw Error(ErrorCode::kMalformedRecord, "item " + item.id + " has no category");
  }
  for (const auto& c : item.categories) {
    if (c.empty() || c.find_first_of("|\t\n") != std::string::npos) {
      throw Error(ErrorCode::kMalformedRecord, "item " + item.id + " has a bad category name");
    }
  }
  if (item.price && (!std::isfinite(*item.price) || *item.price < 0.0)) {
    throw Error(ErrorCode::kMalformedRecord, "item " + item.id + " has a negative price");
  }
  if (item.rating && (!std::isfinite(*item.rating) || *item.rating < 1.0 || *item.rating > 5.0)) {
    throw Error(ErrorCode::kMalformedRecord, "item " + item.id + " rating outside [1,5]");
  }
  if (item.features.empty()) {
    throw Error(ErrorCode::kMalformedRecord, "item " + item.id + " has no features");
  }
  for (double f : item.features) {
    if (!std::isfinite(f)) {
      throw Error(ErrorCode::kMalformedRecord, "item " + item.id + " has a non-finite feature");
    }
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void Catalog::add(Item item) {
  std::sort(item.categories.begin(), item.categories.end());
  item.categories.erase(std::unique(item.categories.begin(), item.categories.end()),
                        item.categories.end());
  check_item(item);
  if (items_.empty()) {
    feature_dim_ = item.features.size();
  } else if (item.features.size() != feature_dim_) {
    throw Error(ErrorCode::kInconsistentFeatureDim,
                "item " + item.id + " has " + std::to_string(item.features.size()) +
                    " features, expected " + std::to_string(feature_dim_));
  }
  if (by_id_.contains(item.id)) {
    throw Error(ErrorCode::kDuplicateId, "duplicate item id " + item.id);
  }
  by_id_.emplace(item.id, items_.size());
  items_.push_back(std::move(item));
}

std::optional<std::size_t> Catalog::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t Catalog::index_of(std::string_view id) const {
  if (auto idx = find(id)) return *idx;
  throw Error(ErrorCode::kUnknownItem, "unknown item " + std::string(id));
}

Catalog parse_catalog(std::istream& in) {
  Catalog catalog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 7) {
      malformed(line_no, "expected 7 tab-separated fields, got " + std::to_string(fields.size()));
    }
    Item item;
    item.id = std::string(fields[0]);
    if (!valid_id(item.id)) malformed(line_no, "item id must be non-empty alphanumeric");
    if (fields[1].empty()) malformed(line_no, "no categories");
    for (auto c : split(fields[1], '|')) {
      if (c.empty()) malformed(line_no, "empty category name");
      item.categories.emplace_back(c);
    }
    if (!fields[2].empty()) item.brand = std::string(fields[2]);
    item.price = optional_number(fields[3], line_no, "price");
    item.rating = optional_number(fields[4], line_no, "rating");
    if (!fields[5].empty()) item.image_ref = std::string(fields[5]);
    if (fields[6].empty()) malformed(line_no, "no features");
    for (auto f : split(fields[6], ',')) {
      auto value = parse_double(f);
      if (!value || !std::isfinite(*value)) malformed(line_no, "bad feature value");
      item.features.push_back(*value);
    }
    try {
      catalog.add(std::move(item));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMalformedRecord) malformed(line_no, e.what());
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return catalog;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open catalog " + path.string());
  return parse_catalog(in);
}

void write_catalog(std::ostream& out, const Catalog& catalog) {
  for (const auto& item : catalog) {
    out << item.id << '\t';
    for (std::size_t c = 0; c < item.categories.size(); ++c) {
      if (c) out << '|';
      out << item.categories[c];
    }
    out << '\t' << item.brand.value_or("") << '\t';
    if (item.price) out << format_double(*item.price);
    out << '\t';
    if (item.rating) out << format_double(*item.rating);
    out << '\t' << item.image_ref.value_or("") << '\t';
    for (std::size_t f = 0; f < item.features.size(); ++f) {
      if (f) out << ',';
      out << format_double(item.features[f]);
    }
    out << '\n';
  }
}

void save_catalog(const std::filesystem::path& path, const Catalog& catalog) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write catalog " + path.string());
  write_catalog(out, catalog);
}

}  // namespace fashionista
