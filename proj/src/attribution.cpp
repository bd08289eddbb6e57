#include "toxtrig/attribution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>
#include <unordered_set>

#include "toxtrig/errors.hpp"
#include "toxtrig/io.hpp"
#include "toxtrig/random.hpp"

namespace toxtrig {

using nlohmann::json;

std::vector<double> shapley_exact(std::size_t m, const CoalitionValue& value) {
  if (m > kMaxExactTokens) {
    throw DataError("exact Shapley enumeration supports at most " + std::to_string(kMaxExactTokens) +
                    " tokens, got " + std::to_string(m) + "; use sampled attribution");
  }
  const std::size_t n_masks = std::size_t{1} << m;
  std::vector<double> v(n_masks);
  std::vector<std::size_t> present;
  present.reserve(m);
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    present.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1U) present.push_back(i);
    }
    v[mask] = value(present);
  }

  // weight[s] = s! (m - s - 1)! / m! = 1 / (m * C(m - 1, s))
  std::vector<double> weight(m);
  double binom = 1.0;
  for (std::size_t s = 0; s < m; ++s) {
    weight[s] = 1.0 / (static_cast<double>(m) * binom);
    binom = binom * static_cast<double>(m - 1 - s) / static_cast<double>(s + 1);
  }

  std::vector<double> phi(m, 0.0);
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      if (mask & bit) continue;
      phi[i] += weight[size] * (v[mask | bit] - v[mask]);
    }
  }
  return phi;
}

SampledShapley shapley_sample(std::size_t m, const CoalitionValue& value, std::size_t permutations,
                              std::uint64_t seed) {
  if (permutations < 1) throw DataError("need at least one permutation");
  SampledShapley out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  if (m == 0) return out;

  Rng rng(seed);
  const double empty_value = value({});
  std::vector<double> m2(m, 0.0);  // Welford sums of squared deviations of pair means
  std::vector<std::size_t> order(m);
  std::vector<bool> in(m);
  std::vector<std::size_t> present;
  present.reserve(m);
  std::vector<double> pair_sum(m);

  const auto walk = [&](auto first, auto last) {
    std::fill(in.begin(), in.end(), false);
    double prev = empty_value;
    for (auto it = first; it != last; ++it) {
      in[*it] = true;
      present.clear();
      for (std::size_t i = 0; i < m; ++i) {
        if (in[i]) present.push_back(i);
      }
      const double cur = value(present);
      pair_sum[*it] += cur - prev;
      prev = cur;
    }
  };

  const std::size_t pairs = (permutations + 1) / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    rng.shuffle(order);
    std::fill(pair_sum.begin(), pair_sum.end(), 0.0);
    walk(order.begin(), order.end());
    walk(order.rbegin(), order.rend());
    for (std::size_t i = 0; i < m; ++i) {
      const double sample = pair_sum[i] / 2.0;
      const double delta = sample - out.values[i];
      out.values[i] += delta / static_cast<double>(p + 1);
      m2[i] += delta * (sample - out.values[i]);
    }
  }
  if (pairs > 1) {
    const auto n = static_cast<double>(pairs);
    for (std::size_t i = 0; i < m; ++i) out.std_errors[i] = std::sqrt(m2[i] / (n - 1) / n);
  }
  return out;
}

std::string_view to_string(OutputSpace s) { return s == OutputSpace::Logit ? "logit" : "probability"; }

OutputSpace parse_output_space(std::string_view s) {
  if (s == "logit") return OutputSpace::Logit;
  if (s == "probability") return OutputSpace::Probability;
  throw ConfigError("attribution.output", "expected logit or probability, got " + std::string(s));
}

CoalitionValue token_coalition_value(const TriggerClassifier& model, std::span<const std::string> tokens,
                                     OutputSpace output) {
  return [&model, tokens, output](std::span<const std::size_t> present) {
    std::vector<std::string> kept;
    kept.reserve(present.size());
    for (std::size_t i : present) kept.push_back(tokens[i]);
    const double z = model.logit(kept);
    return output == OutputSpace::Logit ? z : sigmoid(z);
  };
}

namespace {

std::vector<Attribution> label(std::span<const std::string> tokens, const std::vector<double>& values,
                               const std::vector<double>* errors = nullptr) {
  std::vector<Attribution> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back({tokens[i], i, values[i], errors ? (*errors)[i] : 0.0});
  }
  return out;
}

}  // namespace

std::vector<Attribution> shapley_exact(const TriggerClassifier& model, std::span<const std::string> tokens,
                                       OutputSpace output) {
  return label(tokens, shapley_exact(tokens.size(), token_coalition_value(model, tokens, output)));
}

std::vector<Attribution> shapley_sample(const TriggerClassifier& model, std::span<const std::string> tokens,
                                        std::size_t permutations, std::uint64_t seed, OutputSpace output) {
  auto s = shapley_sample(tokens.size(), token_coalition_value(model, tokens, output), permutations, seed);
  return label(tokens, s.values, &s.std_errors);
}

LinearAttribution linear_shapley(const LogisticModel& model, std::span<const std::string> tokens) {
  LinearAttribution out;
  for (std::size_t i = 0; i < tokens.size(); ++i) out.values.push_back({tokens[i], i, model.weight(tokens[i]), 0.0});
  if (model.hyperparams().max_ngram >= 2) {
    // Removal can make any ordered pair adjacent, so every pair is a potential bigram.
    for (std::size_t i = 0; i < tokens.size() && !out.approximate; ++i) {
      for (std::size_t j = i + 1; j < tokens.size(); ++j) {
        if (model.weight(tokens[i] + ' ' + tokens[j]) != 0.0) {
          out.approximate = true;
          break;
        }
      }
    }
  }
  return out;
}

void AttributionConfig::validate() const {
  if (max_exact_tokens > kMaxExactTokens) {
    throw ConfigError("attribution.max_exact_tokens", "must be <= " + std::to_string(kMaxExactTokens));
  }
  if (permutations < 1) throw ConfigError("attribution.permutations", "must be >= 1");
}

CommentAttribution attribute_comment(const TriggerClassifier& model, const CommentText& comment,
                                     const AttributionConfig& config) {
  const std::vector<std::string> tokens = tokenize(comment.text, model.tokenizer());
  const auto value = token_coalition_value(model, tokens, config.output);
  std::vector<std::size_t> all(tokens.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  CommentAttribution out;
  out.comment_id = comment.id;
  out.full_value = value(all);
  out.empty_value = value({});
  if (tokens.size() <= config.max_exact_tokens) {
    out.method = "exact";
    out.tokens = label(tokens, shapley_exact(tokens.size(), value));
  } else {
    out.method = "sampled";
    auto s = shapley_sample(tokens.size(), value, config.permutations, derive_seed(config.seed, comment.id));
    out.tokens = label(tokens, s.values, &s.std_errors);
  }
  return out;
}

std::vector<CommentAttribution> attribute_comments(const TriggerClassifier& model,
                                                   std::span<const CommentText> comments,
                                                   const AttributionConfig& config) {
  config.validate();
  std::vector<CommentAttribution> out(comments.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < comments.size(); i = next++) out[i] = attribute_comment(model, comments[i], config);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.parallelism, comments.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return out;
}

std::vector<TermAggregate> rank_attributed_terms(std::span<const CommentAttribution> comments) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& c : comments) {
    for (const auto& a : c.tokens) {
      auto& [sum, n] = acc[a.token];
      sum += a.value;
      ++n;
    }
  }
  std::vector<TermAggregate> out;
  out.reserve(acc.size());
  for (const auto& [term, s] : acc) out.push_back({term, s.first / static_cast<double>(s.second), s.second});
  std::stable_sort(out.begin(), out.end(), [](const TermAggregate& a, const TermAggregate& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.term < b.term;
  });
  return out;
}

TopTerms aggregate_top_terms(std::span<const CommentAttribution> comments, std::size_t k) {
  if (comments.empty()) throw DataError("no attributed comments to aggregate");
  TopTerms out;
  out.terms = rank_attributed_terms(comments);
  if (k > out.terms.size()) {
    out.note = "requested top " + std::to_string(k) + " but only " + std::to_string(out.terms.size()) +
               " distinct terms were attributed; returning all";
  } else {
    out.terms.resize(k);
  }
  return out;
}

AttributionReport make_report(std::vector<CommentAttribution> comments) {
  AttributionReport r;
  r.ranking = rank_attributed_terms(comments);
  r.comments = std::move(comments);
  return r;
}

void to_json(json& j, const AttributionReport& report) {
  json comments = json::array();
  for (const auto& c : report.comments) {
    json tokens = json::array();
    for (const auto& a : c.tokens) {
      tokens.push_back({{"token", a.token}, {"position", a.position}, {"value", a.value}, {"std_error", a.std_error}});
    }
    comments.push_back({{"comment_id", c.comment_id},
                        {"method", c.method},
                        {"full_value", c.full_value},
                        {"empty_value", c.empty_value},
                        {"tokens", tokens}});
  }
  json ranking = json::array();
  for (const auto& t : report.ranking) {
    ranking.push_back({{"term", t.term}, {"mean", t.mean}, {"occurrences", t.occurrences}});
  }
  j = json{{"comments", comments}, {"ranking", ranking}};
}

std::vector<TermCount> context_terms(std::span<const std::string> texts, std::span<const std::string> trigger_terms,
                                     std::size_t min_count, const TokenizerConfig& tokenizer) {
  const std::unordered_set<std::string> triggers(trigger_terms.begin(), trigger_terms.end());
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    const auto tokens = tokenize(text, tokenizer);
    if (std::none_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return triggers.count(t) != 0; })) {
      continue;
    }
    for (const auto& t : tokens) {
      if (!triggers.count(t)) ++counts[t];
    }
  }
  std::vector<TermCount> out;
  for (const auto& [term, c] : counts) {
    if (c >= min_count) out.push_back({term, c});
  }
  std::stable_sort(out.begin(), out.end(), [](const TermCount& a, const TermCount& b) { return a.count > b.count; });
  return out;
}

std::string ranked_terms_csv(std::span<const TermAggregate> ranking) {
  std::string out = "rank,term,mean_shapley,occurrences\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out += csv_row({std::to_string(i + 1), ranking[i].term, format_double(ranking[i].mean),
                    std::to_string(ranking[i].occurrences)});
  }
  return out;
}

std::string context_terms_csv(std::span<const TermCount> terms) {
  std::string out = "term,count\n";
  for (const auto& t : terms) out += csv_row({t.term, std::to_string(t.count)});
  return out;
}

}  // namespace toxtrig
