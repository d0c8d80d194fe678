#include "fashionista/interactions.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "fashionista/error.h"

namespace fashionista {

void sort_interactions(std::vector<Interaction>& interactions) {
  std::sort(interactions.begin(), interactions.end(),
            [](const Interaction& a, const Interaction& b) {
              return std::tie(a.timestamp, a.user, a.item) <
                     std::tie(b.timestamp, b.user, b.item);
            });
}

std::vector<Interaction> parse_interactions(std::istream& in, const Catalog& catalog) {
  std::vector<Interaction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": expected user<TAB>item<TAB>unix_ts");
    }
    Interaction x;
    x.user = line.substr(0, t1);
    x.item = line.substr(t1 + 1, t2 - t1 - 1);
    const char* first = line.data() + t2 + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, x.timestamp);
    if (x.user.empty() || x.item.empty() || first == last || ec != std::errc() || ptr != last) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": bad record");
    }
    if (!catalog.find(x.item)) {
      throw Error(ErrorCode::kUnknownItem,
                  "line " + std::to_string(line_no) + ": unknown item " + x.item);
    }
    out.push_back(std::move(x));
  }
  sort_interactions(out);
  return out;
}

std::vector<Interaction> load_interactions(const std::filesystem::path& path,
                                           const Catalog& catalog) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open interactions " + path.string());
  return parse_interactions(in, catalog);
}

void write_interactions(std::ostream& out, std::span<const Interaction> interactions) {
  for (const auto& x : interactions) {
    out << x.user << '\t' << x.item << '\t' << x.timestamp << '\n';
  }
}

void save_interactions(const std::filesystem::path& path,
                       std::span<const Interaction> interactions) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write interactions " + path.string());
  write_interactions(out, interactions);
}

HoldoutSplit split_leave_last_out(std::span<const Interaction> interactions) {
  std::unordered_map<std::string, std::size_t> last;
  std::unordered_map<std::string, std::size_t> count;
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    last[interactions[i].user] = i;
    ++count[interactions[i].user];
  }
  HoldoutSplit split;
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    const auto& x = interactions[i];
    if (count[x.user] >= 2 && last[x.user] == i) {
      split.heldout.push_back(x);
    } else {
      split.train.push_back(x);
    }
  }
  return split;
}

}  // namespace fashionista
