#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fashionista/catalog.h"

namespace fashionista {

/// One purchase triplet (user, item, timestamp in Unix seconds, UTC).
struct Interaction {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// Sorts by timestamp, ties by (user, item).
void sort_interactions(std::vector<Interaction>& interactions);

/// Parses `user \t item \t unix_ts` lines. Every item must exist in the
/// catalog (UnknownItem); output is sorted with sort_interactions.
std::vector<Interaction> parse_interactions(std::istream& in, const Catalog& catalog);
std::vector<Interaction> load_interactions(const std::filesystem::path& path,
                                           const Catalog& catalog);

void write_interactions(std::ostream& out, std::span<const Interaction> interactions);
void save_interactions(const std::filesystem::path& path,
                       std::span<const Interaction> interactions);

struct HoldoutSplit {
  std::vector<Interaction> train;
  std::vector<Interaction> heldout;
};

/// Leave-last-out: for each user with at least two interactions, the latest
/// one (by the sort order above) moves to `heldout`.
HoldoutSplit split_leave_last_out(std::span<const Interaction> interactions);

}  // namespace fashionista
