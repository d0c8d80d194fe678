#include "fashionista/model.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fashionista/error.h"
#include "fashionista/rng.h"

namespace fashionista {
namespace {

constexpr double kInitRange = 0.01;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void fill_uniform(Matrix& m, Rng& rng) {
  for (double& v : m.data()) v = rng.uniform(-kInitRange, kInitRange);
}

std::size_t model_item_index(const FashionModel& model, const Item& item) {
  if (auto idx = model.find_item(item.id)) return *idx;
  throw Error(ErrorCode::kUnknownItem, "item " + item.id + " is not in the model");
}

void check_epoch(const FashionModel& model, std::size_t epoch) {
  if (epoch >= model.num_epochs()) {
    throw Error(ErrorCode::kEpochOutOfRange, "epoch " + std::to_string(epoch) + " not in [0, " +
                                                 std::to_string(model.num_epochs()) + ")");
  }
}

double personal_terms(const FashionModel& model, std::size_t user, std::size_t item,
                      std::span<const double> theta) {
  return dot(model.user_factors.row(user), model.item_factors.row(item)) +
         dot(model.user_visual_offset.row(user), theta);
}

}  // namespace

void Hyperparams::validate() const {
  if (visual_dim < 1) throw Error(ErrorCode::kInvalidSpec, "visual dimension K must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidSpec, "learning_rate must be positive");
  }
  if (!(reg_lambda >= 0.0) || !(reg_embed >= 0.0) || !(reg_epoch_bias >= 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "regularisation must be non-negative");
  }
}

std::optional<std::size_t> FashionModel::find_item(std::string_view id) const {
  auto it = item_index_.find(std::string(id));
  if (it == item_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FashionModel::find_user(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

void FashionModel::reset(std::vector<std::string> item_ids, std::vector<std::string> user_ids,
                         EpochTable epoch_table, std::size_t feature_dim,
                         std::size_t visual_dim, std::size_t latent_dim) {
  item_ids_ = std::move(item_ids);
  user_ids_ = std::move(user_ids);
  item_index_.clear();
  user_index_.clear();
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    if (!item_index_.emplace(item_ids_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate item id " + item_ids_[i]);
    }
  }
  for (std::size_t u = 0; u < user_ids_.size(); ++u) {
    if (!user_index_.emplace(user_ids_[u], u).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate user id " + user_ids_[u]);
    }
  }
  epochs = std::move(epoch_table);
  const std::size_t n = item_ids_.size();
  const std::size_t users = user_ids_.size();
  const std::size_t e = epochs.size();
  embedding = Matrix(visual_dim, feature_dim);
  epoch_weights = Matrix(e, visual_dim);
  item_bias.assign(n, 0.0);
  item_epoch_bias = Matrix(n, e);
  user_factors = Matrix(users, latent_dim);
  item_factors = Matrix(n, latent_dim);
  user_visual_offset = Matrix(users, visual_dim);
}

bool FashionModel::is_consistent() const {
  const std::size_t k = visual_dim();
  const std::size_t l = latent_dim();
  const std::size_t n = num_items();
  const std::size_t users = num_users();
  const std::size_t e = num_epochs();
  const bool shapes = epoch_weights.rows() == e && epoch_weights.cols() == k &&
                      item_bias.size() == n && item_epoch_bias.rows() == n &&
                      item_epoch_bias.cols() == e && user_factors.rows() == users &&
                      user_factors.cols() == l && item_factors.rows() == n &&
                      user_visual_offset.rows() == users && user_visual_offset.cols() == k;
  return shapes && all_finite(embedding.data()) && all_finite(epoch_weights.data()) &&
         all_finite(item_bias) && all_finite(item_epoch_bias.data()) &&
         all_finite(user_factors.data()) && all_finite(item_factors.data()) &&
         all_finite(user_visual_offset.data());
}

bool operator==(const FashionModel& a, const FashionModel& b) {
  return a.item_ids_ == b.item_ids_ && a.user_ids_ == b.user_ids_ && a.epochs == b.epochs &&
         a.embedding == b.embedding && a.epoch_weights == b.epoch_weights &&
         a.item_bias == b.item_bias && a.item_epoch_bias == b.item_epoch_bias &&
         a.user_factors == b.user_factors && a.item_factors == b.item_factors &&
         a.user_visual_offset == b.user_visual_offset;
}

void style_position(const FashionModel& model, std::span<const double> features,
                    std::span<double> theta) {
  if (features.size() != model.feature_dim() || theta.size() != model.visual_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "features have " + std::to_string(features.size()) + " entries, model expects " +
                    std::to_string(model.feature_dim()));
  }
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = dot(model.embedding.row(k), features);
}

std::vector<double> style_position(const FashionModel& model, const Item& item) {
  std::vector<double> theta(model.visual_dim());
  style_position(model, item.features, theta);
  return theta;
}

double fashionability_at(const FashionModel& model, std::size_t item_index,
                         std::span<const double> theta, std::size_t epoch) {
  check_epoch(model, epoch);
  return model.item_bias[item_index] + model.item_epoch_bias(item_index, epoch) +
         dot(model.epoch_weights.row(epoch), theta);
}

double fashionability(const FashionModel& model, const Item& item, std::size_t epoch) {
  check_epoch(model, epoch);
  const std::size_t idx = model_item_index(model, item);
  return fashionability_at(model, idx, style_position(model, item), epoch);
}

double predict_preference(const FashionModel& model, std::string_view user, const Item& item,
                          std::size_t epoch) {
  check_epoch(model, epoch);
  const std::size_t idx = model_item_index(model, item);
  const auto theta = style_position(model, item);
  const double fash = fashionability_at(model, idx, theta, epoch);
  const auto u = model.find_user(user);
  if (!u) return fash;
  return fash + personal_terms(model, *u, idx, theta);
}

std::vector<TrendPoint> fashionability_series(const FashionModel& model, const Item& item) {
  const std::size_t idx = model_item_index(model, item);
  const auto theta = style_position(model, item);
  std::vector<TrendPoint> series;
  series.reserve(model.num_epochs());
  for (std::size_t e = 0; e < model.num_epochs(); ++e) {
    series.push_back({model.epochs.labels[e], fashionability_at(model, idx, theta, e)});
  }
  return series;
}

void require_same_items(const FashionModel& model, const Catalog& catalog) {
  bool same = model.num_items() == catalog.size();
  for (std::size_t i = 0; same && i < catalog.size(); ++i) {
    same = model.item_ids()[i] == catalog[i].id;
  }
  if (!same) {
    throw Error(ErrorCode::kInconsistentInputs, "model item table does not match the catalog");
  }
  if (model.feature_dim() != catalog.feature_dim()) {
    throw Error(ErrorCode::kInconsistentInputs, "model feature dimension does not match the catalog");
  }
}

FashionModel init_model(const Catalog& catalog, std::span<const Interaction> interactions,
                        const EpochTable& epochs, const Hyperparams& hp) {
  hp.validate();
  epochs.validate();
  std::vector<std::string> items;
  items.reserve(catalog.size());
  for (const auto& item : catalog) items.push_back(item.id);
  std::vector<std::string> users;
  for (const auto& x : interactions) users.push_back(x.user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());

  FashionModel model;
  model.reset(std::move(items), std::move(users), epochs, catalog.feature_dim(), hp.visual_dim,
              hp.latent_dim);
  Rng rng(hp.seed);
  fill_uniform(model.embedding, rng);
  fill_uniform(model.epoch_weights, rng);
  fill_uniform(model.user_factors, rng);
  fill_uniform(model.item_factors, rng);
  fill_uniform(model.user_visual_offset, rng);
  return model;
}

Matrix feature_matrix(const Catalog& catalog) {
  Matrix features(catalog.size(), catalog.feature_dim());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    std::copy(catalog[i].features.begin(), catalog[i].features.end(), features.row(i).begin());
  }
  return features;
}

double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

void pair_gradient(const FashionModel& model, const Matrix& features, const PairSample& s,
                   PairGradient& out) {
  const std::size_t k_dim = model.visual_dim();
  const std::size_t f_dim = model.feature_dim();
  const std::size_t l_dim = model.latent_dim();

  // Only the feature difference matters: theta_i - theta_j = E (f_i - f_j).
  thread_local std::vector<double> feature_diff;
  feature_diff.resize(f_dim);
  const auto fi = features.row(s.positive);
  const auto fj = features.row(s.negative);
  for (std::size_t f = 0; f < f_dim; ++f) feature_diff[f] = fi[f] - fj[f];

  out.epoch_weights.resize(k_dim);  // reused below as theta_i - theta_j
  for (std::size_t k = 0; k < k_dim; ++k) {
    out.epoch_weights[k] = dot(model.embedding.row(k), feature_diff);
  }
  const auto eta = model.epoch_weights.row(s.epoch);
  const auto delta = model.user_visual_offset.row(s.user);
  const auto gu = model.user_factors.row(s.user);
  const auto gi = model.item_factors.row(s.positive);
  const auto gj = model.item_factors.row(s.negative);

  double diff = model.item_bias[s.positive] - model.item_bias[s.negative] +
                model.item_epoch_bias(s.positive, s.epoch) -
                model.item_epoch_bias(s.negative, s.epoch);
  for (std::size_t l = 0; l < l_dim; ++l) diff += gu[l] * (gi[l] - gj[l]);
  for (std::size_t k = 0; k < k_dim; ++k) diff += (delta[k] + eta[k]) * out.epoch_weights[k];

  out.objective = log_sigmoid(diff);
  // d/d(diff) ln sigma(diff) = sigma(-diff)
  const double g = diff >= 0.0 ? std::exp(-diff) / (1.0 + std::exp(-diff))
                               : 1.0 / (1.0 + std::exp(diff));

  out.item_bias_pos = g;
  out.item_bias_neg = -g;
  out.epoch_bias_pos = g;
  out.epoch_bias_neg = -g;
  out.user_factors.resize(l_dim);
  out.item_factors_pos.resize(l_dim);
  out.item_factors_neg.resize(l_dim);
  for (std::size_t l = 0; l < l_dim; ++l) {
    out.user_factors[l] = g * (gi[l] - gj[l]);
    out.item_factors_pos[l] = g * gu[l];
    out.item_factors_neg[l] = -g * gu[l];
  }
  out.user_visual_offset.resize(k_dim);
  for (std::size_t k = 0; k < k_dim; ++k) {
    out.epoch_weights[k] *= g;
    out.user_visual_offset[k] = out.epoch_weights[k];
  }
  if (out.embedding.rows() != k_dim || out.embedding.cols() != f_dim) {
    out.embedding = Matrix(k_dim, f_dim);
  }
  for (std::size_t k = 0; k < k_dim; ++k) {
    const double w = g * (delta[k] + eta[k]);
    auto row = out.embedding.row(k);
    for (std::size_t f = 0; f < f_dim; ++f) row[f] = w * feature_diff[f];
  }
}

FashionModel train(const Catalog& catalog, std::span<const Interaction> interactions,
                   const EpochTable& epochs, const Hyperparams& hp, TrainingReport* report) {
  if (interactions.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training interactions");
  FashionModel model = init_model(catalog, interactions, epochs, hp);
  const Matrix features = feature_matrix(catalog);

  struct Observed {
    std::size_t user, item, epoch;
  };
  std::vector<Observed> observed;
  observed.reserve(interactions.size());
  std::vector<std::unordered_set<std::size_t>> owned(model.num_users());
  for (const auto& x : interactions) {
    const std::size_t u = *model.find_user(x.user);
    const std::size_t i = catalog.index_of(x.item);
    const auto e = epochs.epoch_of(x.timestamp);
    if (!e) {
      throw Error(ErrorCode::kEpochOutOfRange,
                  "interaction timestamp " + std::to_string(x.timestamp) + " outside epoch table");
    }
    observed.push_back({u, i, *e});
    owned[u].insert(i);
  }

  const std::size_t n = catalog.size();
  const double lr = hp.learning_rate;
  const double reg = hp.reg_lambda;
  const double reg_embed = hp.reg_embed;
  const double reg_offset = hp.reg_epoch_bias;
  const std::uint64_t tail_start = hp.iterations - hp.iterations / 10;
  double tail_sum = 0.0;
  std::uint64_t tail_count = 0;
  TrainingReport local;

  Rng rng(hp.seed ^ 0x9e3779b97f4a7c15ULL);
  PairGradient grad;
  for (std::uint64_t step = 0; step < hp.iterations; ++step) {
    const Observed& obs = observed[rng.below(observed.size())];
    if (owned[obs.user].size() >= n) {
      ++local.skipped;
      continue;
    }
    std::size_t j = rng.below(n);
    while (owned[obs.user].contains(j)) j = rng.below(n);
    const PairSample sample{obs.user, obs.item, j, obs.epoch};
    pair_gradient(model, features, sample, grad);
    if (!std::isfinite(grad.objective)) {
      throw Error(ErrorCode::kDivergedTraining,
                  "non-finite objective at step " + std::to_string(step) + " (user " +
                      model.user_ids()[obs.user] + ", item " + model.item_ids()[obs.item] +
                      "); try a smaller learning_rate");
    }
    if (step >= tail_start) {
      tail_sum += grad.objective;
      ++tail_count;
    }

    double& bi = model.item_bias[obs.item];
    double& bj = model.item_bias[j];
    bi += lr * (grad.item_bias_pos - reg * bi);
    bj += lr * (grad.item_bias_neg - reg * bj);
    double& ei = model.item_epoch_bias(obs.item, obs.epoch);
    double& ej = model.item_epoch_bias(j, obs.epoch);
    ei += lr * (grad.epoch_bias_pos - reg_offset * ei);
    ej += lr * (grad.epoch_bias_neg - reg_offset * ej);

    auto gu = model.user_factors.row(obs.user);
    auto gi = model.item_factors.row(obs.item);
    auto gj = model.item_factors.row(j);
    for (std::size_t l = 0; l < gu.size(); ++l) {
      gu[l] += lr * (grad.user_factors[l] - reg * gu[l]);
      gi[l] += lr * (grad.item_factors_pos[l] - reg * gi[l]);
      gj[l] += lr * (grad.item_factors_neg[l] - reg * gj[l]);
    }
    auto delta = model.user_visual_offset.row(obs.user);
    auto eta = model.epoch_weights.row(obs.epoch);
    for (std::size_t k = 0; k < delta.size(); ++k) {
      delta[k] += lr * (grad.user_visual_offset[k] - reg * delta[k]);
      eta[k] += lr * (grad.epoch_weights[k] - reg_embed * eta[k]);
    }
    auto& e_data = model.embedding.data();
    const auto& g_data = grad.embedding.data();
    for (std::size_t p = 0; p < e_data.size(); ++p) {
      e_data[p] += lr * (g_data[p] - reg_embed * e_data[p]);
    }
    ++local.steps;
  }

  if (!model.is_consistent()) {
    throw Error(ErrorCode::kDivergedTraining,
                "non-finite parameters after " + std::to_string(local.steps) + " steps");
  }
  local.mean_objective_last = tail_count ? tail_sum / static_cast<double>(tail_count) : 0.0;
  if (report) *report = local;
  return model;
}

double auc_evaluate(const FashionModel& model, std::span<const Interaction> heldout,
                    const Catalog& catalog, std::span<const Interaction> known,
                    std::size_t negatives, std::uint64_t seed) {
  if (heldout.empty()) throw Error(ErrorCode::kEmptyHeldout, "no held-out interactions");
  require_same_items(model, catalog);
  std::unordered_map<std::string, std::unordered_set<std::size_t>> seen;
  for (const auto& x : known) seen[x.user].insert(catalog.index_of(x.item));
  for (const auto& x : heldout) seen[x.user].insert(catalog.index_of(x.item));

  const std::size_t n = catalog.size();
  const std::size_t k_dim = model.visual_dim();
  Matrix theta(n, k_dim);
  for (std::size_t i = 0; i < n; ++i) style_position(model, catalog[i].features, theta.row(i));
  auto score = [&](std::optional<std::size_t> u, std::size_t i, std::size_t e) {
    const double fash = fashionability_at(model, i, theta.row(i), e);
    return u ? fash + personal_terms(model, *u, i, theta.row(i)) : fash;
  };

  Rng rng(seed);
  double wins = 0.0;
  std::size_t pairs = 0;
  for (const auto& x : heldout) {
    const auto& excluded = seen[x.user];
    if (excluded.size() >= n) continue;
    const auto u = model.find_user(x.user);
    const std::size_t i = catalog.index_of(x.item);
    const std::size_t e = model.epochs.clamped_epoch_of(x.timestamp);
    const double pos = score(u, i, e);
    for (std::size_t s = 0; s < negatives; ++s) {
      std::size_t j = rng.below(n);
      while (excluded.contains(j)) j = rng.below(n);
      const double neg = score(u, j, e);
      wins += pos > neg ? 1.0 : (pos == neg ? 0.5 : 0.0);
      ++pairs;
    }
  }
  if (pairs == 0) throw Error(ErrorCode::kEmptyHeldout, "no comparable held-out pairs");
  return wins / static_cast<double>(pairs);
}

}  // namespace fashionista
