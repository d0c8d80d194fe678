#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fashionista/catalog.h"
#include "fashionista/epochs.h"
#include "fashionista/interactions.h"
#include "fashionista/matrix.h"

namespace fashionista {

struct Hyperparams {
  std::size_t visual_dim = 10;  // K
  std::size_t latent_dim = 10;  // L, 0 disables the latent term
  double learning_rate = 0.05;
  double reg_lambda = 0.01;     // biases, latent factors, personal offsets
  double reg_embed = 0.001;     // embedding matrix and epoch weights
  double reg_epoch_bias = 1.0;  // per-epoch item bias offsets
  std::uint64_t iterations = 2'000'000;
  std::uint64_t seed = 1;

  /// Throws InvalidSpec.
  void validate() const;
};

/// Learned parameters of the time-aware visual preference model.
///
///   theta_i    = E f_i
///   fash(i, t) = beta_i + beta_i(t) + <eta_t, theta_i>
///   x(u, i, t) = fash(i, t) + <gamma_u, gamma_i> + <delta_u, theta_i>
///
/// fash is the community-level score; the last two terms personalise it.
class FashionModel {
 public:
  FashionModel() = default;

  std::size_t feature_dim() const noexcept { return embedding.cols(); }
  std::size_t visual_dim() const noexcept { return embedding.rows(); }
  std::size_t latent_dim() const noexcept { return item_factors.cols(); }
  std::size_t num_epochs() const noexcept { return epochs.size(); }
  std::size_t num_items() const noexcept { return item_ids_.size(); }
  std::size_t num_users() const noexcept { return user_ids_.size(); }

  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
  const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
  std::optional<std::size_t> find_item(std::string_view id) const;
  std::optional<std::size_t> find_user(std::string_view id) const;

  /// Resets the id tables and sizes every parameter block (zero-filled).
  void reset(std::vector<std::string> item_ids, std::vector<std::string> user_ids,
             EpochTable epoch_table, std::size_t feature_dim, std::size_t visual_dim,
             std::size_t latent_dim);

  /// True when every parameter is finite and block shapes agree.
  bool is_consistent() const;

  Matrix embedding;           // E: K x F
  Matrix epoch_weights;       // eta: N x K
  std::vector<double> item_bias;  // beta_i
  Matrix item_epoch_bias;     // beta_i(t) offsets: items x N
  Matrix user_factors;        // gamma_u: users x L
  Matrix item_factors;        // gamma_i: items x L
  Matrix user_visual_offset;  // delta_u: users x K
  EpochTable epochs;

  friend bool operator==(const FashionModel& a, const FashionModel& b);

 private:
  std::vector<std::string> item_ids_;
  std::vector<std::string> user_ids_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::unordered_map<std::string, std::size_t> user_index_;
};

/// theta = E f. Throws DimensionMismatch.
std::vector<double> style_position(const FashionModel& model, const Item& item);
void style_position(const FashionModel& model, std::span<const double> features,
                    std::span<double> theta);

/// Community fashionability from a precomputed style position.
double fashionability_at(const FashionModel& model, std::size_t item_index,
                         std::span<const double> theta, std::size_t epoch);
/// Throws EpochOutOfRange, UnknownItem, DimensionMismatch.
double fashionability(const FashionModel& model, const Item& item, std::size_t epoch);

/// Personalised score. Users unknown to the model get fashionability alone
/// (cold start).
double predict_preference(const FashionModel& model, std::string_view user, const Item& item,
                          std::size_t epoch);

struct TrendPoint {
  std::string label;
  double score = 0.0;
};
/// One point per epoch, chronological. Throws UnknownItem.
std::vector<TrendPoint> fashionability_series(const FashionModel& model, const Item& item);

/// Throws InconsistentInputs unless the model's item table is exactly the
/// catalog's ids in catalog order.
void require_same_items(const FashionModel& model, const Catalog& catalog);

/// Documented initialisation: biases zero; E, eta, gamma and delta
/// i.i.d. uniform in [-0.01, 0.01] drawn in that block order from Rng(seed).
/// Users are the distinct users of `interactions`, sorted by id.
FashionModel init_model(const Catalog& catalog, std::span<const Interaction> interactions,
                        const EpochTable& epochs, const Hyperparams& hp);

// ---- training internals, exposed for gradient checks ----

/// One BPR triple in index space.
struct PairSample {
  std::size_t user = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t epoch = 0;
};

/// Gradient of ln sigma(x(u,i,t) - x(u,j,t)) with respect to every parameter
/// block the sample touches (regularisation excluded).
struct PairGradient {
  double objective = 0.0;
  double item_bias_pos = 0.0;
  double item_bias_neg = 0.0;
  double epoch_bias_pos = 0.0;
  double epoch_bias_neg = 0.0;
  std::vector<double> user_factors;
  std::vector<double> item_factors_pos;
  std::vector<double> item_factors_neg;
  std::vector<double> user_visual_offset;
  std::vector<double> epoch_weights;
  Matrix embedding;
};

/// Item features laid out as a dense items x F matrix in catalog order.
Matrix feature_matrix(const Catalog& catalog);

/// Numerically stable ln(sigma(z)).
double log_sigmoid(double z);

void pair_gradient(const FashionModel& model, const Matrix& features, const PairSample& sample,
                   PairGradient& out);

struct TrainingReport {
  std::uint64_t steps = 0;
  std::uint64_t skipped = 0;  // samples whose user owns every item
  double mean_objective_last = 0.0;  // mean ln sigma over the final 10% of steps
};

/// BPR stochastic gradient ascent. Deterministic given hp.seed.
/// Throws EmptyTrainingSet, UnknownItem, DivergedTraining.
FashionModel train(const Catalog& catalog, std::span<const Interaction> interactions,
                   const EpochTable& epochs, const Hyperparams& hp,
                   TrainingReport* report = nullptr);

/// Sampled AUC: each held-out (u, i, t) is compared against `negatives`
/// items u never interacted with (per `known` plus the held-out set),
/// ties count one half. Throws EmptyHeldout.
double auc_evaluate(const FashionModel& model, std::span<const Interaction> heldout,
                    const Catalog& catalog, std::span<const Interaction> known = {},
                    std::size_t negatives = 100, std::uint64_t seed = 7);

}  // namespace fashionista
