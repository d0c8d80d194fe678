#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fashionista/error.h"
#include "fashionista/model.h"
#include "fashionista/model_io.h"
#include "fashionista/rng.h"
#include "fashionista/synthetic.h"
#include "test_support.h"

namespace fashionista {
namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoError;
}

double rel_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-7});
  return std::abs(a - b) / scale;
}

struct Fixture {
  Catalog catalog;
  std::vector<std::string> users;
  EpochTable epochs;
  FashionModel model;
};

Fixture random_fixture(std::size_t items, std::size_t f, std::size_t k, std::size_t l,
                       std::size_t n_epochs, std::size_t n_users, std::uint64_t seed) {
  Fixture fx;
  fx.catalog = testing::random_catalog(items, f, 3, seed, /*coarse=*/false);
  for (std::size_t u = 0; u < n_users; ++u) fx.users.push_back("u" + std::to_string(u));
  fx.epochs = testing::year_epochs(n_epochs);
  fx.model = testing::random_model(fx.catalog, fx.users, fx.epochs, k, l, seed + 100);
  return fx;
}

// ---- scoring ----

TEST(Scoring, StylePositionMatchesTripleLoop) {
  const auto fx = random_fixture(40, 9, 4, 2, 3, 5, 1);
  for (const auto& item : fx.catalog) {
    const auto theta = style_position(fx.model, item);
    ASSERT_EQ(theta.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
      double s = 0.0;
      for (std::size_t f = 0; f < 9; ++f) s += fx.model.embedding(k, f) * item.features[f];
      EXPECT_NEAR(theta[k], s, 1e-12);
    }
  }
}

TEST(Scoring, FashionabilityFormula) {
  const auto fx = random_fixture(30, 6, 3, 2, 4, 5, 2);
  for (std::size_t i = 0; i < fx.catalog.size(); ++i) {
    const auto theta = style_position(fx.model, fx.catalog[i]);
    for (std::size_t e = 0; e < 4; ++e) {
      const double expected = fx.model.item_bias[i] + fx.model.item_epoch_bias(i, e) +
                              dot(fx.model.epoch_weights.row(e), theta);
      EXPECT_NEAR(fashionability(fx.model, fx.catalog[i], e), expected, 1e-12);
      EXPECT_EQ(fashionability_at(fx.model, i, theta, e),
                fashionability(fx.model, fx.catalog[i], e));
    }
  }
}

TEST(Scoring, FashionabilityErrors) {
  const auto fx = random_fixture(10, 4, 2, 1, 2, 2, 3);
  EXPECT_EQ(code_of([&] { fashionability(fx.model, fx.catalog[0], 2); }),
            ErrorCode::kEpochOutOfRange);
  Item stranger = testing::make_item("zzz", {"c0"}, std::vector<double>(4, 0.0));
  EXPECT_EQ(code_of([&] { fashionability(fx.model, stranger, 0); }), ErrorCode::kUnknownItem);
  Item wrong_dim = fx.catalog[0];
  wrong_dim.features.push_back(1.0);
  EXPECT_EQ(code_of([&] { fashionability(fx.model, wrong_dim, 0); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { fashionability_series(fx.model, stranger); }), ErrorCode::kUnknownItem);
}

TEST(Scoring, PreferenceWithZeroPersonalTermsEqualsFashionability) {
  auto fx = random_fixture(20, 5, 3, 2, 3, 4, 4);
  std::fill(fx.model.user_factors.data().begin(), fx.model.user_factors.data().end(), 0.0);
  std::fill(fx.model.user_visual_offset.data().begin(), fx.model.user_visual_offset.data().end(),
            0.0);
  for (const auto& item : fx.catalog) {
    for (std::size_t e = 0; e < 3; ++e) {
      EXPECT_EQ(predict_preference(fx.model, "u1", item, e), fashionability(fx.model, item, e));
    }
  }
}

TEST(Scoring, UnknownUserFallsBackToFashionability) {
  const auto fx = random_fixture(20, 5, 3, 2, 3, 4, 5);
  for (const auto& item : fx.catalog) {
    EXPECT_EQ(predict_preference(fx.model, "nobody", item, 1), fashionability(fx.model, item, 1));
  }
}

TEST(Scoring, IdenticalItemsScoreIdentically) {
  auto fx = random_fixture(20, 5, 3, 2, 3, 4, 6);
  Catalog twin_catalog;
  for (const auto& item : fx.catalog) twin_catalog.add(item);
  Item twin = fx.catalog[0];
  twin.id = "twin";
  twin_catalog.add(twin);
  auto model = testing::random_model(twin_catalog, fx.users, fx.epochs, 3, 2, 7);
  const std::size_t last = twin_catalog.size() - 1;
  model.item_bias[last] = model.item_bias[0];
  for (std::size_t e = 0; e < 3; ++e) model.item_epoch_bias(last, e) = model.item_epoch_bias(0, e);
  for (std::size_t l = 0; l < 2; ++l) model.item_factors(last, l) = model.item_factors(0, l);
  for (const auto& u : fx.users) {
    for (std::size_t e = 0; e < 3; ++e) {
      EXPECT_EQ(predict_preference(model, u, twin_catalog[0], e),
                predict_preference(model, u, twin_catalog[last], e));
    }
  }
}

TEST(Scoring, PreferenceMatchesRecomputationFromSerialisedWeights) {
  const auto fx = random_fixture(25, 6, 3, 2, 3, 6, 8);
  std::stringstream buf;
  write_model(buf, fx.model);
  const FashionModel dumped = read_model(buf);
  for (std::size_t u = 0; u < fx.users.size(); ++u) {
    for (std::size_t i = 0; i < fx.catalog.size(); ++i) {
      const auto& f = fx.catalog[i].features;
      for (std::size_t e = 0; e < 3; ++e) {
        double x = dumped.item_bias[i] + dumped.item_epoch_bias(i, e);
        for (std::size_t k = 0; k < 3; ++k) {
          double theta = 0.0;
          for (std::size_t p = 0; p < f.size(); ++p) theta += dumped.embedding(k, p) * f[p];
          x += (dumped.epoch_weights(e, k) + dumped.user_visual_offset(u, k)) * theta;
        }
        for (std::size_t l = 0; l < 2; ++l) x += dumped.user_factors(u, l) * dumped.item_factors(i, l);
        EXPECT_NEAR(predict_preference(fx.model, fx.users[u], fx.catalog[i], e), x, 1e-12);
      }
    }
  }
}

TEST(Scoring, ScaleConsistency) {
  const auto fx = random_fixture(50, 7, 4, 2, 3, 5, 9);
  for (const double c : {1e-3, 0.37, 3.0, 250.0}) {
    Catalog scaled;
    for (auto item : fx.catalog) {
      for (auto& v : item.features) v *= c;
      scaled.add(std::move(item));
    }
    FashionModel model = fx.model;
    for (auto& v : model.embedding.data()) v /= c;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      const auto a = style_position(fx.model, fx.catalog[i]);
      const auto b = style_position(model, scaled[i]);
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LT(rel_error(a[k], b[k]), 1e-9);
      for (std::size_t e = 0; e < 3; ++e) {
        EXPECT_LT(rel_error(predict_preference(fx.model, "u2", fx.catalog[i], e),
                            predict_preference(model, "u2", scaled[i], e)),
                  1e-9);
      }
    }
  }
}

std::vector<std::size_t> fash_order(const FashionModel& model, const Catalog& catalog,
                                    std::size_t epoch) {
  std::vector<double> s;
  for (const auto& item : catalog) s.push_back(fashionability(model, item, epoch));
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] < s[b]; });
  return order;
}

TEST(Scoring, UniformBiasShiftPreservesOrdering) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto fx = random_fixture(60, 5, 3, 2, 2, 3, 20 + seed);
    FashionModel shifted = fx.model;
    for (auto& b : shifted.item_bias) b += 2.25;
    for (std::size_t e = 0; e < 2; ++e) {
      EXPECT_EQ(fash_order(fx.model, fx.catalog, e), fash_order(shifted, fx.catalog, e));
    }
  }
}

TEST(Scoring, SeriesMatchesPointwiseFashionability) {
  const auto fx = random_fixture(15, 4, 2, 1, 5, 2, 10);
  for (const auto& item : fx.catalog) {
    const auto series = fashionability_series(fx.model, item);
    ASSERT_EQ(series.size(), 5u);
    for (std::size_t e = 0; e < 5; ++e) {
      EXPECT_EQ(series[e].label, fx.epochs.labels[e]);
      EXPECT_EQ(series[e].score, fashionability(fx.model, item, e));
    }
  }
}

TEST(Scoring, ConstantModelGivesFlatSeries) {
  auto fx = random_fixture(15, 4, 2, 1, 4, 2, 11);
  for (std::size_t e = 1; e < 4; ++e) {
    for (std::size_t k = 0; k < 2; ++k) fx.model.epoch_weights(e, k) = fx.model.epoch_weights(0, k);
  }
  std::fill(fx.model.item_epoch_bias.data().begin(), fx.model.item_epoch_bias.data().end(), 0.0);
  for (const auto& item : fx.catalog) {
    const auto series = fashionability_series(fx.model, item);
    for (const auto& p : series) EXPECT_EQ(p.score, series.front().score);
  }
}

TEST(Scoring, RequireSameItems) {
  const auto fx = random_fixture(10, 4, 2, 1, 2, 2, 12);
  EXPECT_NO_THROW(require_same_items(fx.model, fx.catalog));
  Catalog reversed;
  for (auto it = fx.catalog.items().rbegin(); it != fx.catalog.items().rend(); ++it) reversed.add(*it);
  EXPECT_EQ(code_of([&] { require_same_items(fx.model, reversed); }),
            ErrorCode::kInconsistentInputs);
}

// ---- gradients ----

double pair_objective(const FashionModel& m, const Fixture& fx, const PairSample& s) {
  const std::string& user = m.user_ids()[s.user];
  return log_sigmoid(predict_preference(m, user, fx.catalog[s.positive], s.epoch) -
                     predict_preference(m, user, fx.catalog[s.negative], s.epoch));
}

TEST(Gradient, LogSigmoidIsStable) {
  EXPECT_NEAR(log_sigmoid(0.0), std::log(0.5), 1e-15);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_NEAR(log_sigmoid(800.0), 0.0, 1e-15);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-1e300)));
  for (double z = -30; z <= 30; z += 0.5) {
    EXPECT_NEAR(log_sigmoid(z), -std::log1p(std::exp(-z)), 1e-12);
  }
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  constexpr double h = 1e-5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Fixture fx = random_fixture(6, 8, 3, 2, 3, 3, 300 + seed);
    const Matrix features = feature_matrix(fx.catalog);
    Rng rng(seed);
    PairSample s;
    s.user = rng.below(3);
    s.positive = rng.below(6);
    do s.negative = rng.below(6); while (s.negative == s.positive);
    s.epoch = rng.below(3);
    PairGradient g;
    pair_gradient(fx.model, features, s, g);
    EXPECT_NEAR(g.objective, pair_objective(fx.model, fx, s), 1e-12);

    auto check = [&](double& param, double analytic, const char* what) {
      const double saved = param;
      param = saved + h;
      const double up = pair_objective(fx.model, fx, s);
      param = saved - h;
      const double down = pair_objective(fx.model, fx, s);
      param = saved;
      const double numeric = (up - down) / (2.0 * h);
      EXPECT_LT(rel_error(analytic, numeric), 1e-4)
          << what << " analytic " << analytic << " numeric " << numeric << " seed " << seed;
    };
    auto& m = fx.model;
    check(m.item_bias[s.positive], g.item_bias_pos, "beta_i");
    check(m.item_bias[s.negative], g.item_bias_neg, "beta_j");
    check(m.item_epoch_bias(s.positive, s.epoch), g.epoch_bias_pos, "beta_i(t)");
    check(m.item_epoch_bias(s.negative, s.epoch), g.epoch_bias_neg, "beta_j(t)");
    for (std::size_t l = 0; l < 2; ++l) {
      check(m.user_factors(s.user, l), g.user_factors[l], "gamma_u");
      check(m.item_factors(s.positive, l), g.item_factors_pos[l], "gamma_i");
      check(m.item_factors(s.negative, l), g.item_factors_neg[l], "gamma_j");
    }
    for (std::size_t k = 0; k < 3; ++k) {
      check(m.user_visual_offset(s.user, k), g.user_visual_offset[k], "delta_u");
      check(m.epoch_weights(s.epoch, k), g.epoch_weights[k], "eta_t");
      for (std::size_t f = 0; f < 8; ++f) check(m.embedding(k, f), g.embedding(k, f), "E");
    }
  }
}

// ---- init and training ----

std::vector<Interaction> tiny_interactions(const Catalog& catalog, std::size_t n_users,
                                           std::size_t per_user, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Interaction> out;
  for (std::size_t u = 0; u < n_users; ++u) {
    std::set<std::size_t> picked;
    while (picked.size() < per_user) picked.insert(rng.below(catalog.size()));
    for (const auto i : picked) {
      out.push_back({"u" + std::to_string(u), catalog[i].id,
                     year_start_utc(2006) + static_cast<std::int64_t>(rng.below(3 * 365 * 86400))});
    }
  }
  sort_interactions(out);
  return out;
}

TEST(Training, InitialisationFollowsDocumentedScheme) {
  const Catalog catalog = testing::random_catalog(30, 6, 3, 1, false);
  const auto interactions = tiny_interactions(catalog, 7, 4, 2);
  const auto epochs = segment_epochs(interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.visual_dim = 3;
  hp.latent_dim = 2;
  hp.seed = 42;
  const FashionModel m = init_model(catalog, interactions, epochs, hp);
  EXPECT_TRUE(m.is_consistent());
  EXPECT_EQ(m.num_items(), 30u);
  EXPECT_EQ(m.num_users(), 7u);
  EXPECT_TRUE(std::is_sorted(m.user_ids().begin(), m.user_ids().end()));
  for (double b : m.item_bias) EXPECT_EQ(b, 0.0);
  for (double b : m.item_epoch_bias.data()) EXPECT_EQ(b, 0.0);

  // Reproduce the draw order: E, eta, gamma_u, gamma_i, delta.
  Rng rng(42);
  auto expect_block = [&](const std::vector<double>& block) {
    for (double v : block) {
      const double want = rng.uniform(-0.01, 0.01);
      EXPECT_EQ(v, want);
      EXPECT_LE(std::abs(v), 0.01);
    }
  };
  expect_block(m.embedding.data());
  expect_block(m.epoch_weights.data());
  expect_block(m.user_factors.data());
  expect_block(m.item_factors.data());
  expect_block(m.user_visual_offset.data());
}

TEST(Training, ZeroIterationsEqualsInitialisation) {
  const Catalog catalog = testing::random_catalog(30, 6, 3, 3, false);
  const auto interactions = tiny_interactions(catalog, 5, 5, 4);
  const auto epochs = segment_epochs(interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.visual_dim = 3;
  hp.latent_dim = 2;
  hp.iterations = 0;
  EXPECT_TRUE(train(catalog, interactions, epochs, hp) == init_model(catalog, interactions, epochs, hp));
}

std::string model_bytes(const FashionModel& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

TEST(Training, SameSeedGivesIdenticalBytes) {
  const auto corpus = generate_synthetic(testing::small_spec(21));
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.iterations = 20000;
  const auto a = train(corpus.catalog, corpus.interactions, epochs, hp);
  const auto b = train(corpus.catalog, corpus.interactions, epochs, hp);
  EXPECT_EQ(model_bytes(a), model_bytes(b));
  hp.seed = 2;
  EXPECT_NE(model_bytes(a), model_bytes(train(corpus.catalog, corpus.interactions, epochs, hp)));
}

TEST(Training, Errors) {
  const auto corpus = generate_synthetic(testing::small_spec(22));
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.iterations = 1000;
  EXPECT_EQ(code_of([&] { train(corpus.catalog, {}, epochs, hp); }), ErrorCode::kEmptyTrainingSet);
  std::vector<Interaction> bad = {{"u", "missing", corpus.interactions[0].timestamp}};
  EXPECT_EQ(code_of([&] { train(corpus.catalog, bad, epochs, hp); }), ErrorCode::kUnknownItem);
  Hyperparams huge = hp;
  huge.learning_rate = 1e12;
  EXPECT_EQ(code_of([&] { train(corpus.catalog, corpus.interactions, epochs, huge); }),
            ErrorCode::kDivergedTraining);
  Hyperparams invalid = hp;
  invalid.learning_rate = 0.0;
  EXPECT_EQ(code_of([&] { train(corpus.catalog, corpus.interactions, epochs, invalid); }),
            ErrorCode::kInvalidSpec);
}

TEST(Training, LearnsOnSmallCorpus) {
  auto spec = testing::small_spec(23);
  spec.num_items = 200;
  spec.num_users = 60;
  spec.num_interactions = 4000;
  const auto corpus = generate_synthetic(spec);
  const auto split = split_leave_last_out(corpus.interactions);
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.visual_dim = 4;
  hp.latent_dim = 4;
  hp.iterations = 200000;
  TrainingReport report;
  const auto m = train(corpus.catalog, split.train, epochs, hp, &report);
  EXPECT_EQ(report.steps, hp.iterations);
  EXPECT_GT(report.mean_objective_last, std::log(0.5));
  EXPECT_GT(auc_evaluate(m, split.heldout, corpus.catalog, split.train), 0.7);
}

// ---- AUC ----

TEST(Auc, AllZeroModelGivesOneHalf) {
  const auto corpus = generate_synthetic(testing::small_spec(30));
  const auto split = split_leave_last_out(corpus.interactions);
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  FashionModel m = init_model(corpus.catalog, split.train, epochs, hp);
  for (auto* block : {&m.embedding, &m.epoch_weights, &m.user_factors, &m.item_factors,
                      &m.user_visual_offset}) {
    std::fill(block->data().begin(), block->data().end(), 0.0);
  }
  EXPECT_NEAR(auc_evaluate(m, split.heldout, corpus.catalog, split.train), 0.5, 0.02);
}

TEST(Auc, SinglePairWhereObservedWins) {
  auto fx = random_fixture(2, 3, 2, 1, 1, 1, 31);
  std::fill(fx.model.embedding.data().begin(), fx.model.embedding.data().end(), 0.0);
  std::fill(fx.model.user_factors.data().begin(), fx.model.user_factors.data().end(), 0.0);
  std::fill(fx.model.item_epoch_bias.data().begin(), fx.model.item_epoch_bias.data().end(), 0.0);
  fx.model.item_bias = {1.0, 0.0};
  const std::vector<Interaction> heldout = {
      {"u0", fx.catalog[0].id, fx.epochs.boundaries[0]}};
  EXPECT_EQ(auc_evaluate(fx.model, heldout, fx.catalog, {}, 1), 1.0);
  fx.model.item_bias = {0.0, 1.0};
  EXPECT_EQ(auc_evaluate(fx.model, heldout, fx.catalog, {}, 1), 0.0);
}

TEST(Auc, EmptyHeldout) {
  const auto fx = random_fixture(5, 3, 2, 1, 1, 1, 32);
  EXPECT_EQ(code_of([&] { auc_evaluate(fx.model, {}, fx.catalog); }), ErrorCode::kEmptyHeldout);
}

TEST(Auc, SampledMatchesExhaustiveOnSmallCorpus) {
  auto spec = testing::small_spec(33);
  spec.num_items = 50;
  spec.num_users = 40;
  spec.num_interactions = 600;
  const auto corpus = generate_synthetic(spec);
  const auto split = split_leave_last_out(corpus.interactions);
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.visual_dim = 3;
  hp.latent_dim = 3;
  hp.iterations = 30000;
  const auto m = train(corpus.catalog, split.train, epochs, hp);

  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  for (const auto& x : corpus.interactions) seen[x.user].insert(x.item);
  double wins = 0.0, pairs = 0.0;
  for (const auto& x : split.heldout) {
    const std::size_t e = epochs.clamped_epoch_of(x.timestamp);
    const double pos = predict_preference(m, x.user, corpus.catalog[corpus.catalog.index_of(x.item)], e);
    for (const auto& item : corpus.catalog) {
      if (seen[x.user].contains(item.id)) continue;
      const double neg = predict_preference(m, x.user, item, e);
      wins += pos > neg ? 1.0 : (pos == neg ? 0.5 : 0.0);
      pairs += 1.0;
    }
  }
  const double exact = wins / pairs;
  EXPECT_NEAR(auc_evaluate(m, split.heldout, corpus.catalog, split.train), exact, 0.03);
}

// ---- model file ----

TEST(ModelFile, RoundTripIsExact) {
  const auto fx = random_fixture(40, 6, 3, 2, 4, 9, 40);
  std::stringstream buf;
  write_model(buf, fx.model);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 8), "FSHM0001");
  const FashionModel back = read_model(buf);
  EXPECT_TRUE(back == fx.model);
  EXPECT_EQ(model_bytes(back), bytes);

  Rng rng(41);
  for (int p = 0; p < 1000; ++p) {
    const auto& user = fx.users[rng.below(fx.users.size())];
    const auto& item = fx.catalog[rng.below(fx.catalog.size())];
    const std::size_t e = rng.below(4);
    const double a = predict_preference(fx.model, user, item, e);
    const double b = predict_preference(back, user, item, e);
    ASSERT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
}

TEST(ModelFile, ZeroLatentDimRoundTrips) {
  const auto fx = random_fixture(10, 4, 2, 0, 2, 3, 42);
  std::stringstream buf;
  write_model(buf, fx.model);
  EXPECT_TRUE(read_model(buf) == fx.model);
}

TEST(ModelFile, CorruptionDetected) {
  const auto fx = random_fixture(10, 4, 2, 1, 2, 3, 43);
  const std::string bytes = model_bytes(fx.model);
  auto read_bytes = [](const std::string& b) {
    std::istringstream in(b);
    return read_model(in);
  };
  std::string bad_magic = bytes;
  bad_magic[7] = '2';
  EXPECT_EQ(code_of([&] { read_bytes(bad_magic); }), ErrorCode::kBadModelFile);
  EXPECT_EQ(code_of([&] { read_bytes(bytes.substr(0, bytes.size() - 3)); }),
            ErrorCode::kBadModelFile);
  EXPECT_EQ(code_of([&] { read_bytes(bytes.substr(0, 20)); }), ErrorCode::kBadModelFile);
  EXPECT_EQ(code_of([&] { read_bytes(bytes + "x"); }), ErrorCode::kBadModelFile);
  EXPECT_EQ(code_of([&] { read_bytes(""); }), ErrorCode::kBadModelFile);
  std::string nan_param = bytes;
  const double nan = std::nan("");
  std::memcpy(nan_param.data() + nan_param.size() - 8, &nan, 8);
  EXPECT_EQ(code_of([&] { read_bytes(nan_param); }), ErrorCode::kBadModelFile);
}

TEST(ModelFile, SaveAndLoad) {
  const auto fx = random_fixture(10, 4, 2, 1, 2, 3, 44);
  const auto path = std::filesystem::temp_directory_path() / "fashionista_model_test.bin";
  save_model(path, fx.model);
  EXPECT_TRUE(load_model(path) == fx.model);
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([&] { load_model(path); }), ErrorCode::kIoError);
}

}  // namespace
}  // namespace fashionista
