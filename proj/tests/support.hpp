#pragma once

#include <algorithm>
#include <set>
#include <unordered_map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "toxtrig/attribution.hpp"
#include "toxtrig/classifier.hpp"
#include "toxtrig/triggers.hpp"

namespace toxtrig::testing {

// Shapley values by averaging marginal contributions over all m! orderings.
inline std::vector<double> brute_force_shapley(std::size_t m, const CoalitionValue& value) {
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(m, 0.0);
  double perms = 0;
  do {
    std::vector<std::size_t> present;
    double prev = value(present);
    for (std::size_t i : order) {
      present.insert(std::upper_bound(present.begin(), present.end(), i), i);
      const double cur = value(present);
      phi[i] += cur - prev;
      prev = cur;
    }
    perms += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& v : phi) v /= perms;
  return phi;
}

inline const std::vector<std::string>& alphabet() {
  static const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta",
                                              "iota", "kappa", "lambda", "mu"};
  return words;
}

// Random logistic model over the test alphabet; bigram weights only when max_ngram is 2.
inline LogisticModel random_model(std::mt19937_64& gen, int max_ngram) {
  std::normal_distribution<double> normal;
  std::vector<std::vector<std::string>> docs;
  for (const auto& a : alphabet())
    for (const auto& b : alphabet()) docs.push_back({a, b});
  const auto vocab = Vocabulary::build(docs, max_ngram);
  Eigen::VectorXd w(vocab.size());
  for (int i = 0; i < vocab.size(); ++i) w[i] = normal(gen);
  return LogisticModel(vocab, w, normal(gen), Hyperparams{.max_ngram = max_ngram});
}

inline std::vector<std::string> random_tokens(std::mt19937_64& gen, std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(alphabet()[gen() % alphabet().size()]);
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline std::vector<double> values_of(const std::vector<Attribution>& attrs) {
  std::vector<double> v;
  for (const auto& a : attrs) v.push_back(a.value);
  return v;
}

inline Comment node(const std::string& id, const std::string& parent, std::int64_t t = 1) {
  Comment c;
  c.id = id;
  if (!parent.empty()) c.parent_id = parent;
  c.thread_id = "t3_x";
  c.author = "u";
  c.body = "b";
  c.created_at = t;
  c.community = "c";
  return c;
}

struct RandomForest {
  std::vector<Comment> comments;
  LabelMap labels;
};

// Reply forest with a few orphans and all four labels.
inline RandomForest random_forest(std::mt19937_64& gen, std::size_t size) {
  RandomForest f;
  for (std::size_t i = 0; i < size; ++i) {
    const std::string id = "c" + std::to_string(i);
    std::string parent;
    if (i > 0 && gen() % 8 != 0) parent = "c" + std::to_string(gen() % i);
    if (i > 0 && gen() % 50 == 0) parent = "gone" + std::to_string(i);
    f.comments.push_back(node(id, parent, static_cast<std::int64_t>(gen() % 1000)));
    const auto l = gen() % 10;
    f.labels[id] = l < 4 ? ToxicityLabel::Toxic : l < 8 ? ToxicityLabel::NonToxic : l < 9 ? ToxicityLabel::Ambiguous
                                                                                         : ToxicityLabel::Other;
  }
  return f;
}

// Quadratic scan over every (comment, reply) pair.
inline std::set<std::string> naive_triggers(const std::vector<Comment>& cs, const LabelMap& labels, int n,
                                            ChildScope scope) {
  const std::size_t size = cs.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < size; ++i) index[cs[i].id] = i;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(size, kNone);
  std::vector<bool> orphan(size, false);
  for (std::size_t i = 0; i < size; ++i) {
    if (!cs[i].parent_id) continue;
    const auto it = index.find(*cs[i].parent_id);
    if (it == index.end()) orphan[i] = true;
    else parent[i] = it->second;
  }
  std::vector<bool> toxic(size), nontoxic(size);
  for (std::size_t i = 0; i < size; ++i) {
    toxic[i] = labels.at(cs[i].id) == ToxicityLabel::Toxic;
    nontoxic[i] = labels.at(cs[i].id) == ToxicityLabel::NonToxic;
  }
  std::set<std::string> out;
  for (std::size_t c = 0; c < size; ++c) {
    if (!nontoxic[c] || orphan[c]) continue;
    int count = 0;
    for (std::size_t r = 0; r < size; ++r) {
      if (!toxic[r]) continue;
      for (std::size_t a = parent[r]; a != kNone; a = scope == ChildScope::Direct ? kNone : parent[a]) {
        if (a == c) {
          ++count;
          break;
        }
      }
    }
    if (count >= n) out.insert(cs[c].id);
  }
  return out;
}

}  // namespace toxtrig::testing
