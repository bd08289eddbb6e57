#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "toxtrig/config.hpp"
#include "toxtrig/errors.hpp"
#include "toxtrig/toxicity.hpp"

namespace toxtrig {

inline constexpr std::array<std::string_view, 8> kStages = {
    "ingest", "score", "characterize", "label-triggers", "train", "evaluate", "attribute", "compare"};

/// Raised when a stage runs before the stage that produces one of its inputs.
class MissingStageError : public Error {
 public:
  MissingStageError(const std::string& stage, const std::string& required, const std::string& artifact)
      : Error(ExitCode::Usage, "stage " + stage + " needs " + artifact + "; run stage " + required + " first") {}
};

struct StageOptions {
  /// Re-run even when inputs and outputs are unchanged.
  bool force = false;
  std::function<void(const std::string&)> log;
};

struct StageOutcome {
  std::string stage;
  bool skipped = false;
  /// Output paths relative to the output directory.
  std::vector<std::string> artifacts;
};

bool is_stage(std::string_view name);

/// Runs one stage. Outputs are written atomically and recorded in `manifest.json` together with
/// the config hash, input digests and timestamps. An unchanged re-run is a no-op unless forced.
StageOutcome run_stage(std::string_view stage, const PipelineConfig& config, const StageOptions& options = {});

/// All stages in order.
std::vector<StageOutcome> run_pipeline(const PipelineConfig& config, const StageOptions& options = {});

std::unique_ptr<ToxicityScorer> make_scorer(const PipelineConfig& config);

/// Directory-safe community name: [A-Za-z0-9._-] kept, anything else becomes '_'.
std::string community_dir(std::string_view community);

}  // namespace toxtrig
