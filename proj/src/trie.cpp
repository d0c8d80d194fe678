#include "fashionista/trie.h"

#include <algorithm>

namespace fashionista {

Trie::Trie() : nodes_(1) {}

std::optional<std::uint32_t> Trie::child(std::uint32_t node, unsigned char c) const {
  const auto& kids = nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), c,
                             [](const auto& kid, unsigned char key) { return kid.first < key; });
  if (it == kids.end() || it->first != c) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> Trie::find_node(std::string_view key) const {
  std::uint32_t node = 0;
  for (char ch : key) {
    auto next = child(node, static_cast<unsigned char>(ch));
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

bool Trie::insert(std::string_view id, std::size_t item_index, std::string image_ref) {
  std::uint32_t node = 0;
  for (char ch : id) {
    const auto c = static_cast<unsigned char>(ch);
    auto& kids = nodes_[node].children;
    auto it = std::lower_bound(kids.begin(), kids.end(), c,
                               [](const auto& kid, unsigned char key) { return kid.first < key; });
    if (it != kids.end() && it->first == c) {
      node = it->second;
      continue;
    }
    const auto fresh = static_cast<std::uint32_t>(nodes_.size());
    kids.insert(it, {c, fresh});
    nodes_.emplace_back();  // invalidates `kids`
    node = fresh;
  }
  if (nodes_[node].entry >= 0) return false;
  nodes_[node].entry = static_cast<std::int64_t>(entries_.size());
  entries_.push_back({std::string(id), std::move(image_ref), item_index});
  return true;
}

std::optional<std::size_t> Trie::lookup(std::string_view id) const {
  auto node = find_node(id);
  if (!node || nodes_[*node].entry < 0) return std::nullopt;
  return entries_[static_cast<std::size_t>(nodes_[*node].entry)].item_index;
}

std::vector<Completion> Trie::complete(std::string_view prefix, std::size_t limit) const {
  std::vector<Completion> out;
  auto start = find_node(prefix);
  if (!start || limit == 0) return out;
  std::vector<std::uint32_t> stack{*start};
  while (!stack.empty() && out.size() < limit) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.entry >= 0) {
      const Entry& e = entries_[static_cast<std::size_t>(node.entry)];
      out.push_back({e.id, e.image_ref});
    }
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
      stack.push_back(it->second);
    }
  }
  return out;
}

}  // namespace fashionista
