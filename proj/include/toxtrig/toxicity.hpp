#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "toxtrig/corpus.hpp"
#include "toxtrig/text.hpp"

namespace toxtrig {

enum class ToxicityLabel : std::size_t { Toxic, NonToxic, Ambiguous, Other };
inline constexpr std::size_t kToxicityLabelCount = 4;
std::string_view to_string(ToxicityLabel label);
ToxicityLabel parse_toxicity_label(std::string_view s);

struct Thresholds {
  double toxic_min = 0.8;
  double nontoxic_max = 0.2;

  /// Throws ConfigError unless 0 <= nontoxic_max < toxic_min <= 1.
  void validate() const;
};

/// A score in [0, 1], or absent with the reason it could not be produced.
struct ScoreResult {
  std::optional<double> value;
  std::string reason;

  static ScoreResult present(double v) { return {v, {}}; }
  static ScoreResult absent(std::string why) { return {std::nullopt, std::move(why)}; }
};

namespace reasons {
inline constexpr std::string_view kNotInReplay = "not_in_replay";
inline constexpr std::string_view kReplayNull = "replay_null";
inline constexpr std::string_view kRemoteError = "remote_error";
inline constexpr std::string_view kInvalidScore = "invalid_score";
inline constexpr std::string_view kScorerError = "scorer_error";
}  // namespace reasons

/// Pluggable toxicity back end. Implementations must be safe to call concurrently.
class ToxicityScorer {
 public:
  virtual ~ToxicityScorer() = default;
  virtual ScoreResult score(std::string_view comment_id, std::string_view text) = 0;
  virtual std::string name() const = 0;
};

/// sigmoid(bias + sum of term weights over tokens). Deterministic and offline.
class LexiconScorer final : public ToxicityScorer {
 public:
  static constexpr double kDefaultBias = -4.0;

  /// Uses the bundled lexicon.
  LexiconScorer();
  explicit LexiconScorer(std::map<std::string, double> weights, double bias = kDefaultBias,
                         TokenizerConfig tokenizer = {});

  /// Tab-separated `term<TAB>weight` lines; '#' starts a comment.
  static LexiconScorer from_file(const std::filesystem::path& path, double bias = kDefaultBias);
  static const std::map<std::string, double>& bundled_lexicon();

  ScoreResult score(std::string_view comment_id, std::string_view text) override;
  std::string name() const override { return "lexicon"; }
  double bias() const { return bias_; }

 private:
  std::map<std::string, double> weights_;
  double bias_;
  TokenizerConfig tokenizer_;
};

/// Precomputed id -> score lookup from NDJSON lines {"id": ..., "score": r | null}.
class ReplayScorer final : public ToxicityScorer {
 public:
  explicit ReplayScorer(std::unordered_map<std::string, std::optional<double>> scores);
  static ReplayScorer from_file(const std::filesystem::path& path);
  static ReplayScorer from_stream(std::istream& in);

  ScoreResult score(std::string_view comment_id, std::string_view text) override;
  std::string name() const override { return "replay"; }
  std::size_t size() const { return scores_.size(); }

 private:
  std::unordered_map<std::string, std::optional<double>> scores_;
};

struct ScoredComment {
  Comment comment;
  ScoreResult score;
};

/// Scores every comment with up to `parallelism` concurrent calls; output keeps input order.
/// Scorer failures become absent scores and never abort the batch.
std::vector<ScoredComment> score_corpus(std::span<const Comment> comments, ToxicityScorer& scorer,
                                        std::size_t parallelism = 1);

/// Inclusive boundaries: >= toxic_min is Toxic, <= nontoxic_max is NonToxic, absent is Other.
ToxicityLabel categorize(std::optional<double> score, const Thresholds& t = {});

struct Distribution {
  std::array<std::size_t, kToxicityLabelCount> counts{};
  std::size_t total = 0;

  bool empty() const { return total == 0; }
  std::size_t count(ToxicityLabel l) const { return counts[static_cast<std::size_t>(l)]; }
  /// 0 for an empty corpus.
  double proportion(ToxicityLabel l) const;
};

Distribution distribution(std::span<const ToxicityLabel> labels);
void to_json(nlohmann::json& j, const Distribution& d);

/// Scored corpus line: the dump record plus toxicity_score and toxicity_label
/// (and toxicity_reason when the score is absent).
nlohmann::json scored_record_json(const ScoredComment& sc, ToxicityLabel label);

struct LabeledComment {
  Comment comment;
  std::optional<double> score;
  ToxicityLabel label = ToxicityLabel::Other;
};

/// Reads the scored-corpus NDJSON written by scored_record_json.
std::vector<LabeledComment> read_scored_corpus(std::istream& in);

}  // namespace toxtrig
