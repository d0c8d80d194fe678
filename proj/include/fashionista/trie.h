#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fashionista {

struct Completion {
  std::string item_id;
  std::string image_ref;

  friend bool operator==(const Completion&, const Completion&) = default;
};

/// Byte-wise character trie over item ids. Children are kept sorted by
/// unsigned byte value so a pre-order walk yields ids in lexicographic order.
class Trie {
 public:
  Trie();

  /// Returns false (and changes nothing) if `id` is already stored.
  bool insert(std::string_view id, std::size_t item_index, std::string image_ref);

  std::optional<std::size_t> lookup(std::string_view id) const;

  /// Up to `limit` stored ids starting with `prefix`, ascending. Matching is
  /// exact and case-sensitive on bytes; an empty prefix matches everything.
  std::vector<Completion> complete(std::string_view prefix, std::size_t limit) const;

  std::size_t size() const noexcept { return entries_.size(); }

 private:
  struct Node {
    std::vector<std::pair<unsigned char, std::uint32_t>> children;
    std::int64_t entry = -1;  // index into entries_
  };
  struct Entry {
    std::string id;
    std::string image_ref;
    std::size_t item_index;
  };

  std::optional<std::uint32_t> child(std::uint32_t node, unsigned char c) const;
  std::optional<std::uint32_t> find_node(std::string_view key) const;

  std::vector<Node> nodes_;
  std::vector<Entry> entries_;
};

}  // namespace fashionista
