#include "fashionista/epochs.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>

#include "fashionista/error.h"

namespace fashionista {
namespace {

std::string iso_date(std::int64_t ts) {
  using namespace std::chrono;
  const sys_days day = floor<days>(sys_seconds{seconds{ts}});
  const year_month_day ymd{day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

std::int64_t year_start_utc(int y) {
  using namespace std::chrono;
  const sys_days day{year{y} / January / 1};
  return duration_cast<seconds>(day.time_since_epoch()).count();
}

int utc_year_of(std::int64_t ts) {
  using namespace std::chrono;
  const sys_days day = floor<days>(sys_seconds{seconds{ts}});
  return static_cast<int>(year_month_day{day}.year());
}

std::optional<std::size_t> EpochTable::epoch_of(std::int64_t ts) const {
  if (boundaries.size() < 2 || ts < boundaries.front() || ts >= boundaries.back()) {
    return std::nullopt;
  }
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), ts);
  return static_cast<std::size_t>(it - boundaries.begin()) - 1;
}

std::size_t EpochTable::clamped_epoch_of(std::int64_t ts) const {
  if (auto e = epoch_of(ts)) return *e;
  return ts < boundaries.front() ? 0 : size() - 1;
}

void EpochTable::validate() const {
  if (labels.empty() || boundaries.size() != labels.size() + 1) {
    throw Error(ErrorCode::kInvalidSpec, "epoch table needs N labels and N+1 boundaries");
  }
  for (std::size_t e = 0; e + 1 < boundaries.size(); ++e) {
    if (boundaries[e] >= boundaries[e + 1]) {
      throw Error(ErrorCode::kInvalidSpec, "epoch boundaries must be strictly increasing");
    }
  }
}

Granularity Granularity::parse(std::string_view text) {
  if (text == "calendar_year") return calendar_year();
  constexpr std::string_view kPrefix = "fixed_count:";
  if (text.starts_with(kPrefix)) {
    const auto digits = text.substr(kPrefix.size());
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && n > 0) {
      return fixed_count(n);
    }
  }
  throw Error(ErrorCode::kInvalidSpec, "granularity must be calendar_year or fixed_count:N, got '" +
                                           std::string(text) + "'");
}

std::string Granularity::to_string() const {
  return kind == Kind::kCalendarYear ? "calendar_year" : "fixed_count:" + std::to_string(count);
}

EpochTable segment_epochs(std::span<const Interaction> interactions, Granularity granularity) {
  if (interactions.empty()) throw Error(ErrorCode::kEmptyInput, "no interactions to segment");
  auto [lo, hi] = std::minmax_element(
      interactions.begin(), interactions.end(),
      [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; });
  const std::int64_t min_ts = lo->timestamp;
  const std::int64_t max_ts = hi->timestamp;

  EpochTable table;
  if (granularity.kind == Granularity::Kind::kCalendarYear) {
    const int first = utc_year_of(min_ts);
    const int last = utc_year_of(max_ts);
    for (int y = first; y <= last; ++y) {
      table.boundaries.push_back(year_start_utc(y));
      table.labels.push_back(std::to_string(y));
    }
    table.boundaries.push_back(year_start_utc(last + 1));
  } else {
    const std::size_t n = granularity.count;
    if (n == 0) throw Error(ErrorCode::kInvalidSpec, "fixed_count must be positive");
    const __int128 span = static_cast<__int128>(max_ts) + 1 - min_ts;
    if (span < static_cast<__int128>(n)) {
      throw Error(ErrorCode::kInvalidSpec, "time span of " + std::to_string(static_cast<long long>(span)) +
                                               "s cannot hold " + std::to_string(n) + " epochs");
    }
    for (std::size_t k = 0; k <= n; ++k) {
      table.boundaries.push_back(min_ts + static_cast<std::int64_t>(span * k / n));
    }
    for (std::size_t k = 0; k < n; ++k) table.labels.push_back(iso_date(table.boundaries[k]));
  }
  table.validate();
  return table;
}

}  // namespace fashionista
