#include "fashionista/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fashionista/epochs.h"
#include "fashionista/error.h"
#include "fashionista/rng.h"

namespace fashionista {
namespace {

constexpr std::array<const char*, 12> kCategoryNames = {
    "Dresses", "Shoes", "Tops", "Pants", "Coats", "Bags",
    "Jewelry", "Accessories", "Skirts", "Swimwear", "Watches", "Hats"};

constexpr double kSecondCategoryProb = 0.3;
constexpr std::size_t kNumBrands = 20;
constexpr int kMaxDrawAttempts = 20;

std::string category_name(std::size_t c) {
  if (c < kCategoryNames.size()) return kCategoryNames[c];
  return "Category" + std::to_string(c);
}

std::string random_item_id(Rng& rng) {
  static constexpr char kAlphabet[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::string id = "B";
  for (int k = 0; k < 9; ++k) id.push_back(kAlphabet[rng.below(36)]);
  return id;
}

std::string user_id(std::size_t u, std::size_t num_users) {
  std::string digits = std::to_string(u);
  const std::size_t width = std::max<std::size_t>(6, std::to_string(num_users).size());
  return "U" + std::string(width - digits.size(), '0') + digits;
}

double round_to(double value, double step) { return std::round(value / step) * step; }

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out.push_back(',');
    out += format_double(values[k]);
  }
  return out;
}

std::vector<double> parse_list(const std::string& text, std::size_t expected) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto v = parse_double(tok);
    if (!v) throw Error(ErrorCode::kMalformedRecord, "planted truth: bad number '" + tok + "'");
    out.push_back(*v);
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::kMalformedRecord, "planted truth: wrong vector length");
  }
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidSpec, what); };
  if (num_items < 2) fail("num_items must be at least 2");
  if (num_users == 0) fail("num_users must be positive");
  if (num_interactions < num_users) fail("num_interactions must be >= num_users");
  if (feature_dim == 0 || style_dim == 0) fail("feature_dim and style_dim must be positive");
  if (style_dim > feature_dim) fail("style_dim (K_true) must not exceed feature_dim (F)");
  if (!trend_slopes.empty() && trend_slopes.size() != style_dim) {
    fail("trend_slopes must have style_dim entries");
  }
  for (double s : trend_slopes) {
    if (!std::isfinite(s)) fail("trend_slopes must be finite");
  }
  if (num_epochs == 0) fail("num_epochs must be positive");
  if (num_categories == 0) fail("num_categories must be positive");
  if (candidates_per_draw == 0) fail("candidates_per_draw must be positive");
  if (!(feature_noise >= 0.0) || !std::isfinite(feature_noise)) fail("feature_noise must be >= 0");
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.num_items;
  const std::size_t k_true = spec.style_dim;
  const std::size_t f_dim = spec.feature_dim;
  const std::size_t epochs = spec.num_epochs;
  std::vector<double> slopes = spec.trend_slopes;
  slopes.resize(k_true, 0.0);

  // Entries of f have variance ~1/F, so |f| ~ 1 whatever F is.
  Matrix mixing(f_dim, k_true);
  const double mix_scale = 1.0 / std::sqrt(static_cast<double>(k_true * f_dim));
  const double noise_scale = spec.feature_noise / std::sqrt(static_cast<double>(f_dim));
  for (double& b : mixing.data()) b = rng.normal() * mix_scale;

  SyntheticCorpus corpus;
  PlantedTruth& truth = corpus.truth;
  truth.style = Matrix(n, k_true);
  truth.item_bias.resize(n);
  truth.trend_rate.resize(n);

  std::unordered_set<std::string> used_ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = random_item_id(rng);
    while (!used_ids.insert(id).second) id = random_item_id(rng);

    auto s = truth.style.row(i);
    for (double& v : s) v = rng.normal();
    truth.item_bias[i] = 0.5 * rng.normal();
    truth.trend_rate[i] = dot(slopes, s);

    Item item;
    item.id = id;
    item.categories.push_back(category_name(rng.below(spec.num_categories)));
    if (spec.num_categories > 1 && rng.uniform() < kSecondCategoryProb) {
      item.categories.push_back(category_name(rng.below(spec.num_categories)));
    }
    char brand[32];
    std::snprintf(brand, sizeof(brand), "Brand%02zu", static_cast<std::size_t>(rng.below(kNumBrands)));
    item.brand = brand;
    item.price = round_to(rng.uniform(10.0, 200.0), 0.01);
    item.rating = round_to(rng.uniform(1.0, 5.0), 0.1);
    item.image_ref = "thumbs/" + id + ".svg";
    item.features.resize(f_dim);
    for (std::size_t f = 0; f < f_dim; ++f) {
      item.features[f] = dot(mixing.row(f), s) + noise_scale * rng.normal();
    }
    truth.item_ids.push_back(id);
    corpus.catalog.add(std::move(item));
  }

  const std::size_t users = spec.num_users;
  truth.user_preference = Matrix(users, k_true);
  std::vector<double> community(k_true);
  for (double& m : community) m = 0.5 * rng.normal();
  std::vector<double> mean_pref(k_true, 0.0);
  for (std::size_t u = 0; u < users; ++u) {
    auto p = truth.user_preference.row(u);
    for (std::size_t d = 0; d < k_true; ++d) {
      p[d] = community[d] + 0.7 * rng.normal();
      mean_pref[d] += p[d] / static_cast<double>(users);
    }
    truth.user_ids.push_back(user_id(u, users));
  }

  truth.popularity = Matrix(n, epochs);
  for (std::size_t i = 0; i < n; ++i) {
    const double base = truth.item_bias[i] + dot(mean_pref, truth.style.row(i));
    for (std::size_t t = 0; t < epochs; ++t) {
      truth.popularity(i, t) = base + static_cast<double>(t) * truth.trend_rate[i];
    }
  }

  std::vector<std::unordered_set<std::size_t>> owned(users);
  std::vector<std::size_t> candidates;
  std::vector<double> weights;
  const std::size_t m = spec.candidates_per_draw;
  for (std::size_t draw = 0; draw < spec.num_interactions; ++draw) {
    const std::size_t u = draw < users ? draw : rng.below(users);
    const std::size_t t = rng.below(epochs);
    const auto pref = truth.user_preference.row(u);

    std::size_t chosen = n;
    for (int attempt = 0; attempt < kMaxDrawAttempts && chosen == n; ++attempt) {
      candidates.clear();
      weights.clear();
      double best = -INFINITY;
      for (std::size_t c = 0; c < m; ++c) {
        const std::size_t i = rng.below(n);
        if (owned[u].contains(i)) continue;
        const double a = truth.item_bias[i] + dot(pref, truth.style.row(i)) +
                         static_cast<double>(t) * truth.trend_rate[i];
        candidates.push_back(i);
        weights.push_back(a);
        best = std::max(best, a);
      }
      if (candidates.empty()) continue;
      double total = 0.0;
      for (double& w : weights) total += (w = std::exp(w - best));
      double r = rng.uniform() * total;
      chosen = candidates.back();
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        r -= weights[c];
        if (r < 0.0) {
          chosen = candidates[c];
          break;
        }
      }
    }
    if (chosen == n) chosen = rng.below(n);  // user owns nearly everything
    owned[u].insert(chosen);

    const int year = spec.start_year + static_cast<int>(t);
    const std::int64_t start = year_start_utc(year);
    const std::int64_t length = year_start_utc(year + 1) - start;
    corpus.interactions.push_back(
        {truth.user_ids[u], truth.item_ids[chosen],
         start + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(length)))});
  }
  sort_interactions(corpus.interactions);
  return corpus;
}

void write_planted_truth(std::ostream& out, const PlantedTruth& truth) {
  const std::size_t n = truth.item_ids.size();
  out << "#planted-truth v1\n";
  out << "dims\t" << n << '\t' << truth.user_ids.size() << '\t' << truth.style.cols() << '\t'
      << truth.popularity.cols() << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << "item\t" << truth.item_ids[i] << '\t' << format_double(truth.item_bias[i]) << '\t'
        << format_double(truth.trend_rate[i]) << '\t' << join(truth.style.row(i)) << '\t'
        << join(truth.popularity.row(i)) << '\n';
  }
  for (std::size_t u = 0; u < truth.user_ids.size(); ++u) {
    out << "user\t" << truth.user_ids[u] << '\t' << join(truth.user_preference.row(u)) << '\n';
  }
}

PlantedTruth read_planted_truth(std::istream& in) {
  auto bad = [](const std::string& what) -> Error {
    return Error(ErrorCode::kMalformedRecord, "planted truth: " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "#planted-truth v1") throw bad("missing v1 header");
  if (!std::getline(in, line)) throw bad("missing dims line");
  std::istringstream dims(line);
  std::string tag;
  std::size_t n = 0, users = 0, k = 0, epochs = 0;
  if (!(dims >> tag >> n >> users >> k >> epochs) || tag != "dims") throw bad("bad dims line");

  PlantedTruth truth;
  truth.style = Matrix(n, k);
  truth.popularity = Matrix(n, epochs);
  truth.user_preference = Matrix(users, k);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw bad("truncated item rows");
    std::istringstream row(line);
    std::string id, bias, rate, style, pop;
    if (!(std::getline(row, tag, '\t') && std::getline(row, id, '\t') &&
          std::getline(row, bias, '\t') && std::getline(row, rate, '\t') &&
          std::getline(row, style, '\t') && std::getline(row, pop)) ||
        tag != "item") {
      throw bad("bad item row");
    }
    truth.item_ids.push_back(id);
    truth.item_bias.push_back(parse_list(bias, 1)[0]);
    truth.trend_rate.push_back(parse_list(rate, 1)[0]);
    auto s = parse_list(style, k);
    std::copy(s.begin(), s.end(), truth.style.row(i).begin());
    auto p = parse_list(pop, epochs);
    std::copy(p.begin(), p.end(), truth.popularity.row(i).begin());
  }
  for (std::size_t u = 0; u < users; ++u) {
    if (!std::getline(in, line)) throw bad("truncated user rows");
    std::istringstream row(line);
    std::string id, pref;
    if (!(std::getline(row, tag, '\t') && std::getline(row, id, '\t') && std::getline(row, pref)) ||
        tag != "user") {
      throw bad("bad user row");
    }
    truth.user_ids.push_back(id);
    auto p = parse_list(pref, k);
    std::copy(p.begin(), p.end(), truth.user_preference.row(u).begin());
  }
  return truth;
}

void write_placeholder_thumbnails(const std::filesystem::path& dir, const Catalog& catalog,
                                  const PlantedTruth& truth) {
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& item = catalog[i];
    if (!item.image_ref) continue;
    const auto path = dir / *item.image_ref;
    std::filesystem::create_directories(path.parent_path());
    int rgb[3] = {128, 128, 128};
    const auto s = truth.style.row(i);
    for (std::size_t c = 0; c < 3 && c < s.size(); ++c) {
      rgb[c] = static_cast<int>(std::lround(255.0 / (1.0 + std::exp(-s[c]))));
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write thumbnail " + path.string());
    char fill[16];
    std::snprintf(fill, sizeof(fill), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"64\" height=\"64\">"
        << "<rect width=\"64\" height=\"64\" fill=\"" << fill << "\"/></svg>\n";
  }
}

}  // namespace fashionista
