// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "fashionista/api.h"
#include "fashionista/model_io.h"
#include "fashionista/server.h"
#include "fashionista/synthetic.h"
#include "test_support.h"

namespace fashionista {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-7});
}

// ---- k-NN oracle ----

/// Brute force with its own percentile cut: every fashionability score is
/// recomputed from the model, sorted, and interpolated between order statistics.
std::vector<std::string> brute_force_knn(const IndexSet& index, const Query& query) {
  const Catalog& catalog = index.catalog();
  const std::size_t epoch = query.epoch.value_or(index.latest_epoch());
  std::vector<double> scores(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    scores[i] = fashionability(index.model(), catalog[i], epoch);
  }
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  const double pos = query.alpha * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  double cut = sorted.back();
  if (lo + 1 < sorted.size()) {
    const double frac = pos - static_cast<double>(lo);
    cut = frac == 0.0 ? sorted[lo]
                      : std::min(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]), sorted[lo + 1]);
  }

  const std::size_t q = catalog.index_of(query.item_id);
  const auto origin = style_position(index.model(), catalog[q]);
  std::vector<std::pair<double, std::string>> cands;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (i == q || scores[i] < cut) continue;
    const auto& cats = catalog[i].categories;
    const bool in_category =
        query.categories.empty() ||
        std::any_of(query.categories.begin(), query.categories.end(), [&](const std::string& c) {
          return std::find(cats.begin(), cats.end(), c) != cats.end();
        });
    if (!in_category) continue;
    cands.emplace_back(squared_distance(origin, style_position(index.model(), catalog[i])),
                       catalog[i].id);
  }
  std::sort(cands.begin(), cands.end());
  std::vector<std::string> out;
  for (std::size_t r = 0; r < std::min(query.k, cands.size()); ++r) out.push_back(cands[r].second);
  return out;
}

Outcome knn_oracle() {
  SyntheticSpec spec;
  spec.num_items = 10000;
  spec.num_users = 500;
  spec.num_interactions = 50000;
  spec.num_epochs = 4;
  spec.seed = 11;
  auto corpus = generate_synthetic(spec);

  // Twins share features with an existing item, so their style positions
  // coincide and ordering falls back to the id tie-break.
  Catalog catalog = corpus.catalog;
  std::vector<std::string> twinned;
  Rng rng(12);
  for (std::size_t t = 0; t < 200; ++t) {
    Item twin = corpus.catalog[rng.below(corpus.catalog.size())];
    twinned.push_back(twin.id);
    twin.id = twin.id + "T" + std::to_string(t);
    catalog.add(std::move(twin));
  }
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.iterations = 300000;
  auto shared_catalog = std::make_shared<const Catalog>(std::move(catalog));
  auto model = std::make_shared<const FashionModel>(
      train(*shared_catalog, corpus.interactions, epochs, hp));
  const auto index = testing::quick_index(shared_catalog, model, 2000, 1);

  std::vector<std::string> names;
  for (const auto& [name, postings] : index->categories()) names.push_back(name);

  const auto start = Clock::now();
  constexpr std::size_t kQueries = 200;
  std::size_t mismatches = 0, tie_queries = 0;
  for (std::size_t q = 0; q < kQueries; ++q) {
    Query query;
    query.item_id = q % 2 == 0 ? twinned[rng.below(twinned.size())]
                               : index->catalog()[rng.below(index->catalog().size())].id;
    static constexpr std::size_t kKs[] = {1, 10, 100};
    static constexpr double kAlphas[] = {0.0, 0.5, 0.9, 1.0};
    query.k = kKs[rng.below(3)];
    query.alpha = kAlphas[rng.below(4)];
    const std::size_t n_cats = rng.below(3);
    for (std::size_t c = 0; c < n_cats; ++c) query.categories.push_back(names[rng.below(names.size())]);
    if (rng.below(2)) query.epoch = rng.below(index->num_epochs());

    const auto got = knn_query(*index, query);
    const auto want = brute_force_knn(*index, query);
    if (testing::result_ids(got) != want) ++mismatches;
    for (std::size_t r = 1; r < got.entries.size(); ++r) {
      if (got.entries[r].distance == got.entries[r - 1].distance) {
        ++tie_queries;
        break;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 30.0,
          fmt("%zu/%zu queries identical (%zu with distance ties), %.1f s", kQueries - mismatches,
              kQueries, tie_queries, elapsed)};
}

// ---- trie ----

Outcome trie_oracle() {
  const Catalog catalog = testing::random_catalog(5000, 2, 3, 21);
  Trie trie;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    trie.insert(catalog[i].id, i, catalog[i].image_ref.value_or(""));
  }
  std::vector<std::string> ids;
  for (const auto& item : catalog) ids.push_back(item.id);
  std::sort(ids.begin(), ids.end());

  Rng rng(22);
  static constexpr char kAlphabet[] = "ABCab01Zz";
  std::size_t mismatches = 0;
  for (int q = 0; q < 1000; ++q) {
    std::string prefix;
    if (q % 2 == 0) {
      const auto& id = catalog[rng.below(catalog.size())].id;
      prefix = id.substr(0, rng.below(id.size() + 1));
    } else {
      const std::size_t len = rng.below(5);
      for (std::size_t c = 0; c < len; ++c) prefix.push_back(kAlphabet[rng.below(9)]);
    }
    const std::size_t limit = 1 + rng.below(60);
    std::vector<std::string> want;
    for (const auto& id : ids) {
      if (want.size() == limit) break;
      if (std::string_view(id).starts_with(prefix)) want.push_back(id);
    }
    std::vector<std::string> got;
    for (const auto& c : trie.complete(prefix, limit)) got.push_back(c.item_id);
    if (got != want) ++mismatches;
  }
  return {mismatches == 0, fmt("%zu/1000 prefixes identical", 1000 - mismatches)};
}

// ---- learning signal ----

Outcome model_auc() {
  SyntheticSpec spec;
  spec.num_items = 1000;
  spec.num_users = 200;
  spec.num_interactions = 20000;
  spec.num_epochs = 4;
  spec.seed = 31;
  const auto corpus = generate_synthetic(spec);
  const auto split = split_leave_last_out(corpus.interactions);
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  const Hyperparams hp;

  // A single random initialisation ranks by an arbitrary visual projection
  // and lands anywhere in roughly [0.4, 0.6]; chance level is its expectation.
  constexpr int kInits = 20;
  double baseline = 0.0, lowest = 1.0, highest = 0.0;
  for (int s = 1; s <= kInits; ++s) {
    Hyperparams init = hp;
    init.seed = static_cast<std::uint64_t>(s);
    const double a = auc_evaluate(init_model(corpus.catalog, split.train, epochs, init),
                                  split.heldout, corpus.catalog, split.train);
    baseline += a / kInits;
    lowest = std::min(lowest, a);
    highest = std::max(highest, a);
  }
  const auto start = Clock::now();
  const auto model = train(corpus.catalog, split.train, epochs, hp);
  const double elapsed = seconds_since(start);
  const double auc = auc_evaluate(model, split.heldout, corpus.catalog, split.train);
  return {auc > 0.75 && std::abs(baseline - 0.5) <= 0.02 && elapsed < 300.0,
          fmt("held-out AUC %.4f, untrained %.4f (mean of %d inits, range %.3f-%.3f), training %.1f s",
              auc, baseline, kInits, lowest, highest, elapsed)};
}

// ---- trend recovery ----

Outcome trend_recovery() {
  SyntheticSpec spec;
  spec.num_items = 1000;
  spec.num_users = 200;
  spec.num_interactions = 20000;
  spec.num_epochs = 4;
  spec.trend_slopes.assign(spec.style_dim, 0.0);
  spec.trend_slopes[0] = 0.5;
  spec.trend_slopes[1] = -0.5;
  spec.seed = 5;
  const auto corpus = generate_synthetic(spec);
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.learning_rate = 0.01;
  hp.iterations = 4'000'000;
  const auto model = train(corpus.catalog, corpus.interactions, epochs, hp);

  constexpr double kTrended = 0.8;  // |planted score change per epoch|
  std::size_t trended = 0, recovered = 0;
  for (std::size_t i = 0; i < corpus.catalog.size(); ++i) {
    if (std::abs(corpus.truth.trend_rate[i]) < kTrended) continue;
    ++trended;
    std::vector<double> learned, planted;
    for (const auto& point : fashionability_series(model, corpus.catalog[i])) {
      learned.push_back(point.score);
    }
    for (std::size_t e = 0; e < epochs.size(); ++e) planted.push_back(corpus.truth.popularity(i, e));
    if (testing::spearman(learned, planted) > 0.8) ++recovered;
  }
  const double share = trended ? static_cast<double>(recovered) / static_cast<double>(trended) : 0.0;
  return {trended > 0 && share >= 0.8,
          fmt("%zu/%zu trended items with Spearman > 0.8 (%.1f%%)", recovered, trended, 100.0 * share)};
}

// ---- gradients ----

Outcome gradient_checks() {
  double worst_bpr = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Catalog catalog = testing::random_catalog(6, 8, 2, 100 + seed, false);
    const std::vector<std::string> users = {"u0", "u1", "u2"};
    FashionModel m = testing::random_model(catalog, users, testing::year_epochs(3), 3, 2, 200 + seed);
    const Matrix features = feature_matrix(catalog);
    Rng rng(seed);
    PairSample s;
    s.user = rng.below(3);
    s.positive = rng.below(6);
    do s.negative = rng.below(6); while (s.negative == s.positive);
    s.epoch = rng.below(3);
    PairGradient g;
    pair_gradient(m, features, s, g);
    auto objective = [&] {
      const std::string& user = users[s.user];
      return log_sigmoid(predict_preference(m, user, catalog[s.positive], s.epoch) -
                         predict_preference(m, user, catalog[s.negative], s.epoch));
    };
    auto check = [&](double& param, double analytic) {
      constexpr double h = 1e-5;
      const double saved = param;
      param = saved + h;
      const double up = objective();
      param = saved - h;
      const double down = objective();
      param = saved;
      worst_bpr = std::max(worst_bpr, rel_error(analytic, (up - down) / (2.0 * h)));
    };
    check(m.item_bias[s.positive], g.item_bias_pos);
    check(m.item_bias[s.negative], g.item_bias_neg);
    check(m.item_epoch_bias(s.positive, s.epoch), g.epoch_bias_pos);
    check(m.item_epoch_bias(s.negative, s.epoch), g.epoch_bias_neg);
    for (std::size_t l = 0; l < 2; ++l) {
      check(m.user_factors(s.user, l), g.user_factors[l]);
      check(m.item_factors(s.positive, l), g.item_factors_pos[l]);
      check(m.item_factors(s.negative, l), g.item_factors_neg[l]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
      check(m.user_visual_offset(s.user, k), g.user_visual_offset[k]);
      check(m.epoch_weights(s.epoch, k), g.epoch_weights[k]);
      for (std::size_t f = 0; f < 8; ++f) check(m.embedding(k, f), g.embedding(k, f));
    }
  }

  double worst_tsne = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    constexpr std::size_t n = 20;
    Rng rng(seed);
    Matrix p_dense(n, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        p_dense(i, j) = p_dense(j, i) = rng.uniform() + 1e-3;
        total += 2.0 * p_dense(i, j);
      }
    }
    for (auto& v : p_dense.data()) v /= total;
    Matrix y(n, 2);
    for (auto& v : y.data()) v = rng.normal();
    Matrix grad(n, 2);
    PairMatrix kernel(n);
    tsne_gradient(PairMatrix::from_dense(p_dense), y, 1.0, grad, kernel);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        constexpr double h = 1e-6;
        const double saved = y(i, c);
        y(i, c) = saved + h;
        const double up = kl_divergence(p_dense, student_t_joint(y));
        y(i, c) = saved - h;
        const double down = kl_divergence(p_dense, student_t_joint(y));
        y(i, c) = saved;
        worst_tsne = std::max(worst_tsne, rel_error(grad(i, c), (up - down) / (2.0 * h)));
      }
    }
  }
  return {worst_bpr < 1e-4 && worst_tsne < 1e-4,
          fmt("max relative error: BPR %.2e, t-SNE %.2e", worst_bpr, worst_tsne)};
}

// ---- t-SNE ----

Outcome tsne_separation() {
  constexpr std::size_t per = 50, dims = 10;
  Rng rng(41);
  Matrix points(2 * per, dims);
  std::vector<int> labels;
  for (std::size_t r = 0; r < 2 * per; ++r) {
    const int c = r < per ? 0 : 1;
    labels.push_back(c);
    for (std::size_t k = 0; k < dims; ++k) points(r, k) = rng.normal() + (c ? 5.0 : 0.0);
  }
  const TsneParams params;
  const auto emb = tsne_embed(points, params);
  const double s = testing::silhouette(emb.coords, labels);
  const double kl_after_exaggeration = emb.kl_trace[params.exaggeration_iterations];
  const double kl_final = emb.kl_trace.back();
  return {s > 0.5 && kl_final < kl_after_exaggeration,
          fmt("silhouette %.3f, KL %.4f after exaggeration -> %.4f final", s, kl_after_exaggeration,
              kl_final)};
}

// ---- serialization ----

Outcome serialization() {
  const auto corpus = generate_synthetic(testing::small_spec(51));
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.iterations = 100000;
  const auto model = train(corpus.catalog, corpus.interactions, epochs, hp);
  const fs::path path = fs::temp_directory_path() / "fashionista_acceptance_model.bin";
  save_model(path, model);
  const auto loaded = load_model(path);
  fs::remove(path);

  Rng rng(52);
  std::size_t identical = 0;
  for (int p = 0; p < 1000; ++p) {
    const std::string& user = model.user_ids()[rng.below(model.num_users())];
    const Item& item = corpus.catalog[rng.below(corpus.catalog.size())];
    const std::size_t epoch = rng.below(model.num_epochs());
    const double a = predict_preference(model, user, item, epoch);
    const double b = predict_preference(loaded, user, item, epoch);
    const double fa = fashionability(model, item, epoch);
    const double fb = fashionability(loaded, item, epoch);
    if (std::memcmp(&a, &b, sizeof a) == 0 && std::memcmp(&fa, &fb, sizeof fa) == 0) ++identical;
  }
  return {identical == 1000, fmt("%zu/1000 probes bit-identical", identical)};
}

// ---- service ----

struct HttpCall {
  std::string method;
  std::string path;
  httplib::Params params;
  std::string body;
};

struct HttpResult {
  int status = 0;
  std::string body;

  friend bool operator==(const HttpResult&, const HttpResult&) = default;
};

HttpResult send(httplib::Client& client, const HttpCall& call) {
  const auto res = call.method == "POST"
                       ? client.Post(call.path, call.body, "application/json")
                       : client.Get(call.path, call.params, httplib::Headers{});
  if (!res) return {-1, httplib::to_string(res.error())};
  return {res->status, res->body};
}

std::vector<HttpCall> mixed_calls(const IndexSet& index, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (const auto& [name, postings] : index.categories()) names.push_back(name);
  std::vector<HttpCall> out;
  for (std::size_t r = 0; r < count; ++r) {
    const auto& item = index.catalog()[rng.below(index.catalog().size())].id;
    switch (rng.below(7)) {
      case 0:
        out.push_back({"GET", "/autocomplete", {{"prefix", item.substr(0, 1 + rng.below(4))}}, ""});
        break;
      case 1: {
        OrderedJson body;
        body["item_id"] = item;
        body["k"] = 1 + rng.below(100);
        body["alpha"] = rng.uniform();
        if (rng.below(2)) body["categories"] = {names[rng.below(names.size())]};
        out.push_back({"POST", "/query", {}, body.dump()});
        break;
      }
      case 2: out.push_back({"GET", "/trend/" + item, {}, ""}); break;
      case 3: out.push_back({"GET", "/item/" + item, {}, ""}); break;
      case 4:
        out.push_back({"GET", "/map", {{"x_min", "-5"}, {"x_max", "5"}, {"y_min", "-5"}, {"y_max", "5"}}, ""});
        break;
      case 5:
        out.push_back({"GET", "/feeling-fashionable", {{"seed", std::to_string(rng.below(1000))}}, ""});
        break;
      default: out.push_back({"GET", "/trend/missing" + std::to_string(r), {}, ""}); break;
    }
  }
  return out;
}

Outcome service() {
  SyntheticSpec spec;
  spec.num_items = 100000;
  spec.num_users = 2000;
  spec.num_interactions = 200000;
  spec.num_epochs = 4;
  spec.seed = 61;
  auto corpus = generate_synthetic(spec);
  const auto epochs = segment_epochs(corpus.interactions, Granularity::calendar_year());
  Hyperparams hp;
  hp.iterations = 1'000'000;
  auto catalog = std::make_shared<const Catalog>(std::move(corpus.catalog));
  auto model = std::make_shared<const FashionModel>(train(*catalog, corpus.interactions, epochs, hp));
  TsneParams tsne;
  tsne.iterations = 500;
  Api api(build_index_set(catalog, model, tsne, /*map_sample_cap=*/1000, /*map_seed=*/1));
  const auto index = api.snapshot();

  ServiceConfig config;
  HttpServer server(api, config);
  const int port = server.bind("127.0.0.1", 0);
  server.start();

  // Latency: sequential k = 100 queries over a keep-alive connection.
  std::vector<std::string> names;
  for (const auto& [name, postings] : index->categories()) names.push_back(name);
  httplib::Client client("127.0.0.1", port);
  client.set_keep_alive(true);
  client.set_tcp_nodelay(true);
  Rng rng(62);
  std::vector<double> millis;
  std::size_t failed = 0;
  for (int q = 0; q < 1000; ++q) {
    OrderedJson body;
    body["item_id"] = index->catalog()[rng.below(index->catalog().size())].id;
    body["k"] = 100;
    body["alpha"] = static_cast<double>(rng.below(5)) / 4.0;
    if (rng.below(2)) body["categories"] = {names[rng.below(names.size())]};
    const auto start = Clock::now();
    const auto res = send(client, {"POST", "/query", {}, body.dump()});
    millis.push_back(1000.0 * seconds_since(start));
    if (res.status != 200) ++failed;
  }
  std::sort(millis.begin(), millis.end());
  const double p99 = millis[static_cast<std::size_t>(std::ceil(0.99 * millis.size())) - 1];

  // Concurrency: the same 1000 requests from 16 client threads, compared with
  // a serial replay.
  const auto calls = mixed_calls(*index, 1000, 63);
  std::vector<HttpResult> serial;
  for (const auto& call : calls) serial.push_back(send(client, call));
  std::vector<HttpResult> parallel(calls.size());
  constexpr std::size_t kThreads = 16;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < kThreads; ++t) {
    workers.emplace_back([&, t] {
      httplib::Client own("127.0.0.1", port);
      own.set_keep_alive(true);
      own.set_tcp_nodelay(true);
      for (std::size_t r = t; r < calls.size(); r += kThreads) parallel[r] = send(own, calls[r]);
    });
  }
  for (auto& w : workers) w.join();
  server.stop();

  std::size_t equal = 0;
  for (std::size_t r = 0; r < calls.size(); ++r) equal += parallel[r] == serial[r] && serial[r].status > 0;
  return {p99 < 50.0 && failed == 0 && equal == calls.size(),
          fmt("p99 /query %.2f ms (median %.2f ms, %zu errors) on %zu items; %zu/%zu concurrent "
              "responses equal serial replay",
              p99, millis[millis.size() / 2], failed, index->catalog().size(), equal, calls.size())};
}

}  // namespace
}  // namespace fashionista

int main() {
  using fashionista::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"knn_oracle_equivalence", fashionista::knn_oracle},
      {"trie_oracle_equivalence", fashionista::trie_oracle},
      {"model_learning_signal", fashionista::model_auc},
      {"trend_recovery", fashionista::trend_recovery},
      {"gradient_checks", fashionista::gradient_checks},
      {"tsne_separation", fashionista::tsne_separation},
      {"serialization_round_trip", fashionista::serialization},
      {"service_latency_and_concurrency", fashionista::service},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
