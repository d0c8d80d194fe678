#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fashionista/catalog.h"
#include "fashionista/interactions.h"
#include "fashionista/matrix.h"

namespace fashionista {

struct SyntheticSpec {
  std::size_t num_items = 1000;
  std::size_t num_users = 200;
  std::size_t num_interactions = 20000;
  std::size_t feature_dim = 64;     // F
  std::size_t style_dim = 10;       // K_true
  std::vector<double> trend_slopes; // per style dim, score per epoch; empty = all zero
  std::size_t num_epochs = 9;
  int start_year = 2006;
  std::size_t num_categories = 8;
  double feature_noise = 0.1;     // relative to the planted signal
  std::size_t candidates_per_draw = 64;
  std::uint64_t seed = 1;

  /// Throws InvalidSpec.
  void validate() const;
};

/// Ground truth behind a generated corpus.
///   popularity(i, t) = item_bias[i] + <mean user preference, style[i]> + t * trend_rate[i]
///   trend_rate[i]    = <trend_slopes, style[i]>
struct PlantedTruth {
  Matrix style;            // items x K_true
  Matrix user_preference;  // users x K_true
  std::vector<double> item_bias;
  std::vector<double> trend_rate;
  Matrix popularity;       // items x epochs
  std::vector<std::string> item_ids;
  std::vector<std::string> user_ids;

  friend bool operator==(const PlantedTruth&, const PlantedTruth&) = default;
};

struct SyntheticCorpus {
  Catalog catalog;
  std::vector<Interaction> interactions;  // sorted
  PlantedTruth truth;
};

/// Deterministic given spec.seed. Items: f_i = B s_i + noise, B with i.i.d.
/// N(0, 1/(K_true F)) entries so that |f_i| is about 1. Each draw picks a
/// user (every user at least once), an epoch uniformly, and then one item from
/// `candidates_per_draw` uniform candidates with probability proportional to
/// exp(item_bias + <p_u + t * slopes, s_i>), skipping items the user already owns.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Text schema, versioned with a `#planted-truth v1` header line:
///   dims <items> <users> <style_dim> <epochs>
///   item <id> <bias> <trend_rate> <s_1,...,s_K> <pop_0,...,pop_{N-1}>
///   user <id> <p_1,...,p_K>
/// Fields are tab-separated.
void write_planted_truth(std::ostream& out, const PlantedTruth& truth);
PlantedTruth read_planted_truth(std::istream& in);

/// Writes one solid-colour SVG square per item under `dir`, named by
/// the item's image_ref; colour keyed by the first three style dimensions.
void write_placeholder_thumbnails(const std::filesystem::path& dir, const Catalog& catalog,
                                  const PlantedTruth& truth);

}  // namespace fashionista
