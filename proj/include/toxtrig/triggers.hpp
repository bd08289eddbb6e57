#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "toxtrig/corpus.hpp"
#include "toxtrig/toxicity.hpp"

namespace toxtrig {

enum class ChildScope { Direct, Descendants };
std::string_view to_string(ChildScope scope);
ChildScope parse_child_scope(std::string_view s);

struct TriggerConfig {
  /// Minimum number of Toxic replies that makes a NonToxic comment a trigger.
  int n = 2;
  ChildScope child_scope = ChildScope::Direct;

  void validate() const;
};

using LabelMap = std::unordered_map<std::string, ToxicityLabel>;

struct TriggerCount {
  std::string id;
  std::size_t toxic_children = 0;

  friend bool operator==(const TriggerCount&, const TriggerCount&) = default;
};

/// Number of Toxic comments among the direct replies (or all descendants) of `id`.
std::size_t toxic_child_count(const CommentThread& thread, std::string_view id, const LabelMap& labels,
                              ChildScope scope);

/// Triggers sorted by id: NonToxic, non-orphan comments with at least n Toxic comments in scope.
/// Throws DataError if a thread member has no label.
std::vector<TriggerCount> label_triggers(std::span<const CommentThread> threads, const LabelMap& labels,
                                         const TriggerConfig& config);

/// NonToxic, non-orphan comments that are not triggers, sorted by id.
std::vector<std::string> nontrigger_candidates(std::span<const CommentThread> threads, const LabelMap& labels,
                                               std::span<const TriggerCount> triggers);

/// Uniform sample without replacement, returned sorted by id. Deterministic per seed and
/// independent of candidate order. Throws DataError when count exceeds the candidates.
std::vector<std::string> sample_nontriggers(std::span<const std::string> candidates, std::size_t count,
                                            std::uint64_t seed);

enum class TriggerLabel { Trigger, NonTrigger };
std::string_view to_string(TriggerLabel label);

struct TriggerExample {
  std::string id;
  std::string text;
  TriggerLabel label = TriggerLabel::NonTrigger;
  std::size_t toxic_children = 0;
};

struct DatasetSplit {
  std::vector<TriggerExample> train;
  std::vector<TriggerExample> test;
  double ratio = 0.8;
  std::uint64_t seed = 0;
};

/// Stratified shuffle-split: each class contributes round(ratio * size) examples to train.
/// Requires disjoint ids, at least 2 examples per class and a non-empty train and test share
/// for each class.
DatasetSplit make_dataset(std::vector<TriggerExample> triggers, std::vector<TriggerExample> nontriggers,
                          double ratio = 0.8, std::uint64_t seed = 0);

/// Manifest: seed, ratio and the ids of each split by class.
nlohmann::json split_manifest(const DatasetSplit& split);

/// CSV with columns comment_id,label,toxic_child_count.
std::string trigger_csv(std::span<const TriggerExample> examples);

}  // namespace toxtrig
