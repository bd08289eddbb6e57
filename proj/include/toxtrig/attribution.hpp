#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toxtrig/classifier.hpp"

namespace toxtrig {

/// Largest token count handled by exact subset enumeration (2^m model calls).
inline constexpr std::size_t kMaxExactTokens = 20;

/// Value of a coalition, given the present token positions in ascending order.
using CoalitionValue = std::function<double(std::span<const std::size_t> present)>;

/// Exact Shapley values of an m-player game by enumerating all 2^m coalitions:
///   phi_i = sum over S not containing i of |S|! (m - |S| - 1)! / m! * (v(S + i) - v(S)).
/// Throws DataError for m > kMaxExactTokens.
std::vector<double> shapley_exact(std::size_t m, const CoalitionValue& value);

struct SampledShapley {
  std::vector<double> values;
  /// Standard error over the antithetic pair means (0 with a single pair).
  std::vector<double> std_errors;
};

/// Monte Carlo estimate over uniformly drawn orderings, each walked forwards and in reverse
/// (antithetic pairs), so `permutations` is rounded up to an even count. Deterministic per seed.
SampledShapley shapley_sample(std::size_t m, const CoalitionValue& value, std::size_t permutations,
                              std::uint64_t seed);

enum class OutputSpace { Logit, Probability };
std::string_view to_string(OutputSpace s);
OutputSpace parse_output_space(std::string_view s);

struct Attribution {
  std::string token;
  std::size_t position = 0;
  double value = 0.0;
  double std_error = 0.0;
};

/// Coalition value for a tokenized comment: absent tokens are removed before featurization,
/// so the empty coalition is the empty text.
CoalitionValue token_coalition_value(const TriggerClassifier& model, std::span<const std::string> tokens,
                                     OutputSpace output = OutputSpace::Logit);

std::vector<Attribution> shapley_exact(const TriggerClassifier& model, std::span<const std::string> tokens,
                                       OutputSpace output = OutputSpace::Logit);
std::vector<Attribution> shapley_sample(const TriggerClassifier& model, std::span<const std::string> tokens,
                                        std::size_t permutations, std::uint64_t seed,
                                        OutputSpace output = OutputSpace::Logit);

struct LinearAttribution {
  std::vector<Attribution> values;
  /// Set when some bigram of the comment's tokens carries weight, so the logit is not
  /// additive in tokens and the values are only an approximation.
  bool approximate = false;
};

/// Closed form for the logit of an additive model: each occurrence gets its unigram weight.
LinearAttribution linear_shapley(const LogisticModel& model, std::span<const std::string> tokens);

struct CommentAttribution {
  std::string comment_id;
  std::string method;  // "exact" or "sampled"
  std::vector<Attribution> tokens;
  double full_value = 0.0;
  double empty_value = 0.0;
};

struct AttributionConfig {
  /// Comments with more tokens than this are sampled instead of enumerated.
  std::size_t max_exact_tokens = 14;
  std::size_t permutations = 2000;
  std::uint64_t seed = 0;
  OutputSpace output = OutputSpace::Logit;
  std::size_t parallelism = 1;

  void validate() const;
};

struct CommentText {
  std::string id;
  std::string text;
};

CommentAttribution attribute_comment(const TriggerClassifier& model, const CommentText& comment,
                                     const AttributionConfig& config);

/// Attributes each comment with its own generator seeded from (config.seed, comment id), so the
/// result does not depend on parallelism. Output keeps input order.
std::vector<CommentAttribution> attribute_comments(const TriggerClassifier& model,
                                                   std::span<const CommentText> comments,
                                                   const AttributionConfig& config);

struct TermAggregate {
  std::string term;
  double mean = 0.0;
  std::size_t occurrences = 0;
};

/// Every attributed token, ranked by mean value over its occurrences (descending, ties by term).
std::vector<TermAggregate> rank_attributed_terms(std::span<const CommentAttribution> comments);

struct TopTerms {
  std::vector<TermAggregate> terms;
  /// Present when k exceeded the number of distinct terms and the full list was returned.
  std::optional<std::string> note;
};

/// First k terms of the ranking. Throws DataError when no comment was attributed.
TopTerms aggregate_top_terms(std::span<const CommentAttribution> comments, std::size_t k);

struct AttributionReport {
  std::vector<CommentAttribution> comments;
  std::vector<TermAggregate> ranking;
};

AttributionReport make_report(std::vector<CommentAttribution> comments);
void to_json(nlohmann::json& j, const AttributionReport& report);

struct TermCount {
  std::string term;
  std::size_t count = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// Term frequencies over texts containing at least one trigger term, trigger terms excluded.
/// Terms below min_count are dropped; sorted by count descending, then term.
std::vector<TermCount> context_terms(std::span<const std::string> texts, std::span<const std::string> trigger_terms,
                                     std::size_t min_count = 1, const TokenizerConfig& tokenizer = {});

/// Columns rank,term,mean_shapley,occurrences.
std::string ranked_terms_csv(std::span<const TermAggregate> ranking);
/// Columns term,count.
std::string context_terms_csv(std::span<const TermCount> terms);

}  // namespace toxtrig
