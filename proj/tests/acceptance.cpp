// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "support.hpp"
#include "toxtrig/characterize.hpp"
#include "toxtrig/compare.hpp"
#include "toxtrig/io.hpp"
#include "toxtrig/pipeline.hpp"

using namespace toxtrig;
using namespace toxtrig::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const fs::path kFixture = fs::path(TOXTRIG_SOURCE_DIR) / "data" / "fixture";

double empty_logit(const TriggerClassifier& m) { return m.logit(std::span<const std::string>{}); }

struct SyntheticCorpus {
  std::vector<TriggerExample> triggers, nontriggers;
};

// 400 comments of 9 filler words; every trigger also carries one planted token.
SyntheticCorpus synthetic_corpus(const std::vector<std::string>& planted, std::uint64_t seed) {
  std::vector<std::string> filler;
  for (int i = 0; i < 40; ++i) filler.push_back("w" + std::to_string(i));
  std::mt19937_64 gen(seed);
  SyntheticCorpus c;
  for (int i = 0; i < 400; ++i) {
    std::vector<std::string> words;
    for (int w = 0; w < 9; ++w) words.push_back(filler[gen() % filler.size()]);
    const bool trigger = i % 2 == 0;
    if (trigger) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(gen() % words.size()), planted[gen() % planted.size()]);
    }
    std::string text;
    for (const auto& w : words) text += w + " ";
    (trigger ? c.triggers : c.nontriggers)
        .push_back({"s" + std::to_string(i), text, trigger ? TriggerLabel::Trigger : TriggerLabel::NonTrigger, 0});
  }
  return c;
}

Outcome shapley_efficiency() {
  std::mt19937_64 gen(1001);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const auto model = random_model(gen, 2);
    const auto tokens = random_tokens(gen, 1 + gen() % 12);
    double sum = 0;
    for (const auto& a : shapley_exact(model, tokens)) sum += a.value;
    worst = std::max(worst, std::abs(sum - (model.logit(tokens) - empty_logit(model))));
  }
  const auto model = random_model(gen, 2);
  const auto tokens = random_tokens(gen, 12);
  const auto t0 = Clock::now();
  shapley_exact(model, tokens);
  const double elapsed = seconds_since(t0);
  return {worst < 1e-9 && elapsed < 1.0, fmt("max |sum - diff| = %.3g, 12-token exact in %.3f s", worst, elapsed)};
}

Outcome oracle_chain() {
  std::mt19937_64 gen(1002);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const auto model = random_model(gen, 1);
    const auto tokens = random_tokens(gen, 1 + gen() % 6);
    const auto brute = brute_force_shapley(tokens.size(), token_coalition_value(model, tokens));
    const auto exact = values_of(shapley_exact(model, tokens));
    const auto linear = linear_shapley(model, tokens);
    if (linear.approximate) return {false, "unigram model flagged approximate"};
    const auto lin = values_of(linear.values);
    worst = std::max({worst, max_abs_diff(brute, exact), max_abs_diff(exact, lin), max_abs_diff(brute, lin)});
  }
  return {worst < 1e-9, fmt("max pairwise difference = %.3g", worst)};
}

Outcome monte_carlo() {
  double worst = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto corpus = synthetic_corpus({"quarantine", "protest", "tax"}, 2000 + i);
    const auto model = train(make_dataset(corpus.triggers, corpus.nontriggers, 0.8, i), {}).model;
    const auto tokens = tokenize(corpus.triggers[i].text, model.tokenizer());
    const std::vector<std::string> ten(tokens.begin(), tokens.begin() + 10);
    const auto exact = values_of(shapley_exact(model, ten));
    worst = std::max(worst, max_abs_diff(exact, values_of(shapley_sample(model, ten, 20000, 7 + i))));
  }
  // Stress family: dense random bigram weights, reported only.
  std::mt19937_64 gen(1003);
  double stress = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto model = random_model(gen, 2);
    const auto tokens = random_tokens(gen, 10);
    const auto exact = values_of(shapley_exact(model, tokens));
    stress = std::max(stress, max_abs_diff(exact, values_of(shapley_sample(model, tokens, 20000, 7 + i))));
  }
  return {worst < 0.02, fmt("max |sampled - exact| = %.4f (dense random bigram models: %.4f)", worst, stress)};
}

Outcome gradient_check() {
  std::mt19937_64 gen(1004);
  std::normal_distribution<double> normal;
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    const int rows = 30, cols = 15;
    std::vector<FeatureVector> xs;
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
      FeatureVector x(cols);
      for (int c = 0; c < cols; ++c)
        if (gen() % 3 == 0) x.insert(c) = static_cast<double>(1 + gen() % 3);
      xs.push_back(x);
      y[r] = static_cast<double>(gen() % 2);
    }
    const auto X = design_matrix(xs, cols);
    Eigen::VectorXd w(cols);
    for (int c = 0; c < cols; ++c) w[c] = 0.5 * normal(gen);
    const double b = normal(gen), l2 = 0.01;
    const auto g = loss_and_gradient(X, y, w, b, l2);
    Eigen::VectorXd numeric(cols + 1), analytic(cols + 1);
    const double h = 1e-5;
    for (int c = 0; c < cols; ++c) {
      Eigen::VectorXd wp = w, wm = w;
      wp[c] += h;
      wm[c] -= h;
      numeric[c] = (loss_and_gradient(X, y, wp, b, l2).loss - loss_and_gradient(X, y, wm, b, l2).loss) / (2 * h);
      analytic[c] = g.grad_weights[c];
    }
    numeric[cols] = (loss_and_gradient(X, y, w, b + h, l2).loss - loss_and_gradient(X, y, w, b - h, l2).loss) / (2 * h);
    analytic[cols] = g.grad_bias;
    worst = std::max(worst, (numeric - analytic).norm() / std::max(1e-12, (numeric + analytic).norm()));
  }
  return {worst < 1e-4, fmt("max relative error = %.3g", worst)};
}

Outcome planted_signal() {
  const auto t0 = Clock::now();
  const std::vector<std::string> planted{"quarantine", "protest", "tax"};
  const auto [triggers, nontriggers] = synthetic_corpus(planted, 1005);
  const auto split = make_dataset(triggers, nontriggers, 0.8, 11);
  const auto model = train(split, {}).model;
  const auto report = evaluate(model, split.test);

  std::vector<CommentText> texts;
  for (const auto& e : triggers) texts.push_back({e.id, e.text});
  AttributionConfig cfg;
  cfg.seed = 5;
  cfg.parallelism = 4;
  const auto top = aggregate_top_terms(attribute_comments(model, texts, cfg), 10);
  std::size_t found = 0;
  for (const auto& p : planted)
    for (const auto& t : top.terms) found += t.term == p;
  const double elapsed = seconds_since(t0);
  return {report.f1 >= 0.95 && found == 3 && elapsed < 60.0,
          fmt("test F1 = %.3f, planted in top-10 = %zu/3, %.2f s", report.f1, found, elapsed)};
}

Outcome trigger_oracle() {
  std::mt19937_64 gen(1006);
  std::size_t mismatches = 0, monotone_failures = 0;
  for (int i = 0; i < 100; ++i) {
    auto f = random_forest(gen, 10 + gen() % 991);
    const auto threads = build_threads(f.comments);
    for (auto scope : {ChildScope::Direct, ChildScope::Descendants}) {
      std::set<std::string> prev;
      for (int n = 3; n >= 1; --n) {
        std::set<std::string> got;
        for (const auto& t : label_triggers(threads, f.labels, {n, scope})) got.insert(t.id);
        mismatches += got != naive_triggers(f.comments, f.labels, n, scope);
        monotone_failures += !std::includes(got.begin(), got.end(), prev.begin(), prev.end());
        prev = std::move(got);
      }
    }
  }
  return {mismatches == 0 && monotone_failures == 0,
          fmt("oracle mismatches = %zu, monotonicity failures = %zu", mismatches, monotone_failures)};
}

Outcome categorization() {
  const bool boundaries = categorize(0.8) == ToxicityLabel::Toxic && categorize(0.2) == ToxicityLabel::NonToxic &&
                          categorize(std::nullopt) == ToxicityLabel::Other &&
                          categorize(0.5) == ToxicityLabel::Ambiguous;
  auto config = load_config(kFixture / "pipeline.yaml");
  const auto out = fs::temp_directory_path() / "toxtrig_acceptance_categorization";
  fs::remove_all(out);
  config.output_dir = out.string();
  run_stage("ingest", config);
  run_stage("score", config);
  const auto got = nlohmann::json::parse(read_file(out / "distribution.json"));
  const auto expected = nlohmann::json::parse(read_file(kFixture / "expected_distribution.json"));
  std::size_t mismatches = 0;
  for (const auto& [label, n] : expected["overall"].items()) mismatches += got["overall"]["counts"][label] != n;
  for (const auto& [community, counts] : expected["communities"].items())
    for (const auto& [label, n] : counts.items()) mismatches += got["communities"][community]["counts"][label] != n;
  fs::remove_all(out);
  return {boundaries && mismatches == 0,
          fmt("boundaries %s, fixture count mismatches = %zu", boundaries ? "ok" : "wrong", mismatches)};
}

Outcome scaled_f() {
  using Array = Eigen::ArrayXd;
  std::mt19937_64 gen(1008);
  double out_of_range = 0, antisym = 0, dup = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<Eigen::Index>(2 + gen() % 60);
    Array nt(n), nn(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      nt[j] = static_cast<double>(gen() % 50);
      nn[j] = static_cast<double>(gen() % 50);
      if (nt[j] + nn[j] == 0) nt[j] = 1;
    }
    if (nt.sum() == 0) nt[0] = 1;
    if (nn.sum() == 0) nn[0] = 1;
    const double tt = nt.sum() + static_cast<double>(gen() % 20), tn = nn.sum() + static_cast<double>(gen() % 20);
    const Array s = scaled_f_scores<double>(nt, nn, tt, tn);
    out_of_range = std::max({out_of_range, (s.abs() - 1.0).maxCoeff(), 0.0});
    antisym = std::max(antisym, (s + scaled_f_scores<double>(nn, nt, tn, tt)).abs().maxCoeff());
    const double factor = static_cast<double>(2 + gen() % 9);
    dup = std::max(dup, (s - scaled_f_scores<double>(nt * factor, nn * factor, tt * factor, tn * factor)).abs().maxCoeff());
  }
  Array sym_t(6), sym_n(6);
  sym_t << 1, 9, 4, 6, 5, 3;
  sym_n << 1, 9, 4, 6, 5, 3;
  const double symmetric = scaled_f_scores<double>(sym_t, sym_n, sym_t.sum(), sym_n.sum()).abs().maxCoeff();
  return {out_of_range == 0 && antisym <= 1e-12 && symmetric <= 1e-12 && dup < 1e-9,
          fmt("range excess = %.3g, antisymmetry = %.3g, symmetric max = %.3g, duplication = %.3g", out_of_range,
              antisym, symmetric, dup)};
}

Outcome overlap() {
  std::mt19937_64 gen(1009);
  std::vector<std::string> pool;
  for (int i = 0; i < 200; ++i) pool.push_back("t" + std::to_string(i));
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = pool, b = pool;
    std::shuffle(a.begin(), a.end(), gen);
    std::shuffle(b.begin(), b.end(), gen);
    a.resize(1 + gen() % 120);
    b.resize(1 + gen() % 120);
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= 100; ++k) ks.push_back(k);
    const TriggerRanking ra{"a", a}, rb{"b", b};
    const auto ab = overlap_at_k(ra, rb, ks);
    const auto ba = overlap_at_k(rb, ra, ks);
    const auto same = overlap_at_k(ra, ra, ks);
    std::vector<std::string> other;
    for (const auto& t : a) other.push_back(t + "_x");
    const auto disjoint = overlap_at_k(ra, {"c", other}, ks);
    double prev = 0;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      failures += ab.entries[j].overlap != ba.entries[j].overlap;
      failures += same.entries[j].overlap != 1.0;
      failures += disjoint.entries[j].overlap != 0.0;
      const double shared = ab.entries[j].overlap * static_cast<double>(ab.entries[j].k);
      failures += shared + 1e-9 < prev;
      prev = shared;
    }
  }
  return {failures == 0, fmt("property violations = %zu", failures)};
}

Outcome determinism() {
  const auto t0 = Clock::now();
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"toxtrig_acceptance_run1", "toxtrig_acceptance_run2"}) {
    auto config = load_config(kFixture / "pipeline.yaml");
    const auto out = fs::temp_directory_path() / name;
    fs::remove_all(out);
    config.output_dir = out.string();
    run_pipeline(config);
    std::map<std::string, std::string> digest;
    for (const auto& e : fs::recursive_directory_iterator(out)) {
      if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
      digest[fs::relative(e.path(), out).generic_string()] = file_sha256(e.path());
    }
    runs.push_back(std::move(digest));
    fs::remove_all(out);
  }
  const double elapsed = seconds_since(t0);
  return {runs[0] == runs[1] && !runs[0].empty() && elapsed < 120.0,
          fmt("%zu artifacts, identical = %s, %.2f s for two runs", runs[0].size(), runs[0] == runs[1] ? "yes" : "no",
              elapsed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"shapley efficiency", shapley_efficiency},
      {"attribution oracle chain", oracle_chain},
      {"monte carlo convergence", monte_carlo},
      {"gradient check", gradient_check},
      {"planted signal recovery", planted_signal},
      {"trigger labeling oracle", trigger_oracle},
      {"categorization", categorization},
      {"scaled f-score properties", scaled_f},
      {"overlap properties", overlap},
      {"end-to-end determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
