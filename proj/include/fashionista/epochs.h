#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fashionista/interactions.h"

namespace fashionista {

/// N contiguous half-open epochs [boundaries[e], boundaries[e+1]).
struct EpochTable {
  std::vector<std::int64_t> boundaries;  // N + 1, strictly increasing
  std::vector<std::string> labels;       // N

  std::size_t size() const noexcept { return labels.size(); }

  /// Epoch containing `ts`, or nullopt when outside the table.
  std::optional<std::size_t> epoch_of(std::int64_t ts) const;
  /// Like epoch_of, but timestamps outside the range map to the first/last epoch.
  std::size_t clamped_epoch_of(std::int64_t ts) const;

  /// Throws InvalidSpec when the invariants do not hold.
  void validate() const;

  friend bool operator==(const EpochTable&, const EpochTable&) = default;
};

struct Granularity {
  enum class Kind { kCalendarYear, kFixedCount };
  Kind kind = Kind::kCalendarYear;
  std::size_t count = 0;  // only for kFixedCount

  static Granularity calendar_year() { return {}; }
  static Granularity fixed_count(std::size_t n) { return {Kind::kFixedCount, n}; }

  /// Accepts "calendar_year" or "fixed_count:N".
  static Granularity parse(std::string_view text);
  std::string to_string() const;
};

/// calendar_year: one epoch per UTC year from the earliest to the latest year
/// in the data. fixed_count N: N equal-duration epochs over [min_ts, max_ts+1).
/// Throws EmptyInput, InvalidSpec (fixed_count 0, or span shorter than N seconds).
EpochTable segment_epochs(std::span<const Interaction> interactions, Granularity granularity);

/// Unix timestamp of January 1st 00:00:00 UTC of `year`.
std::int64_t year_start_utc(int year);
int utc_year_of(std::int64_t ts);

}  // namespace fashionista
