#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "toxtrig/attribution.hpp"
#include "toxtrig/classifier.hpp"
#include "toxtrig/corpus.hpp"
#include "toxtrig/remote_scorer.hpp"
#include "toxtrig/text.hpp"
#include "toxtrig/toxicity.hpp"
#include "toxtrig/triggers.hpp"

namespace toxtrig {

enum class ScorerKind { Lexicon, Replay, Remote };

struct ScorerSettings {
  ScorerKind kind = ScorerKind::Lexicon;
  std::size_t parallelism = 4;
  std::string replay_path;
  std::string lexicon_path;  // empty: bundled lexicon
  double lexicon_bias = LexiconScorer::kDefaultBias;
  RemoteScorerConfig remote;
};

struct AttributionSettings {
  AttributionConfig method;
  std::size_t top_k = 20;
  std::size_t context_top = 500;
  std::size_t context_min_count = 2;
};

/// Everything a pipeline run depends on. Relative paths resolve against `base_dir`
/// (the directory of the config file).
struct PipelineConfig {
  std::filesystem::path base_dir = ".";
  std::vector<std::string> dumps;
  std::string output_dir = "out";
  CleaningConfig cleaning;
  ScorerSettings scorer;
  Thresholds thresholds;
  TokenizerConfig tokenizer;
  std::uint64_t characterize_min_count = 5;
  TriggerConfig triggers;
  double split_ratio = 0.8;
  /// Communities analyzed by the per-community stages; empty means all present in the corpus.
  std::vector<std::string> communities;
  Hyperparams classifier;
  AttributionSettings attribution;
  std::vector<std::size_t> compare_k{20, 50, 100};
  std::uint64_t seed = 42;

  std::filesystem::path resolve(const std::string& p) const;
  std::filesystem::path output_path() const { return resolve(output_dir); }

  /// Throws ConfigError naming the key path of the first invalid value.
  void validate() const;
  /// Canonical form: paths as written, base_dir omitted.
  nlohmann::json to_json() const;
  /// SHA-256 of the canonical JSON without output_dir.
  std::string hash() const;
};

/// Parses YAML text. Unknown keys are rejected with their full key path.
PipelineConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace toxtrig
