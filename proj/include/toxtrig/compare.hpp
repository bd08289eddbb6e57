#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace toxtrig {

struct TriggerRanking {
  std::string community;
  std::vector<std::string> terms;  // best first

  /// Throws DataError on duplicate terms.
  void validate() const;
};

struct OverlapEntry {
  std::size_t k_requested = 0;
  /// k after truncation to the shorter ranking.
  std::size_t k = 0;
  double overlap = 0.0;
  /// Spearman correlation of the shared terms' ranks; absent with fewer than 2 shared terms.
  std::optional<double> rank_correlation;
  bool truncated = false;
};

struct OverlapReport {
  std::string community_a;
  std::string community_b;
  std::vector<OverlapEntry> entries;
};

/// overlap(k) = |top_k(A) intersect top_k(B)| / k, order ignored. A k beyond either ranking's
/// length is truncated and flagged. Throws DataError on an empty ranking or k = 0.
OverlapReport overlap_at_k(const TriggerRanking& a, const TriggerRanking& b, std::span<const std::size_t> ks);

void to_json(nlohmann::json& j, const OverlapReport& r);

/// Rankings, the pairwise overlap matrix (absent with fewer than two communities) and metadata.
nlohmann::json comparison_report(std::span<const TriggerRanking> rankings, std::span<const std::size_t> ks,
                                 const nlohmann::json& metadata, std::size_t ranking_preview = 20);

std::string comparison_markdown(const nlohmann::json& report);

/// Writes `<base>.json` and `<base>.md`. Throws IoError if either cannot be written.
void write_comparison_report(const nlohmann::json& report, const std::filesystem::path& base);

}  // namespace toxtrig
