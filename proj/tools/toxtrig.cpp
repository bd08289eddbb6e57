// Command-line driver for the trigger analysis pipeline.
//
//   toxtrig --config pipeline.yaml --stage all
//   toxtrig --config pipeline.yaml --stage train --seed 7 --force --out runs/seed7
//
// Exit codes: 0 success, 1 usage or config error, 2 data error, 3 external-service error.

#include <CLI11.hpp>

#include <iostream>

#include "toxtrig/config.hpp"
#include "toxtrig/errors.hpp"
#include "toxtrig/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Detect and explain toxicity triggers in threaded comment corpora"};
  std::string config_path;
  std::string stage = "all";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool force = false;
  bool quiet = false;

  std::string stages = "all";
  for (auto s : toxtrig::kStages) stages += ", " + std::string(s);
  app.add_option("--config", config_path, "Pipeline configuration (YAML)")->required();
  app.add_option("--stage", stage, "Stage to run: " + stages)->capture_default_str();
  app.add_option("--seed", seed, "Override seeds.global");
  app.add_option("--out", out_dir, "Override output_dir");
  app.add_flag("--force", force, "Re-run stages even when up to date");
  app.add_flag("-q,--quiet", quiet, "Only print errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(toxtrig::ExitCode::Usage);
  }

  try {
    toxtrig::PipelineConfig config = toxtrig::load_config(config_path);
    if (seed) {
      config.seed = *seed;
      config.classifier.seed = *seed;
      config.attribution.method.seed = *seed;
    }
    if (out_dir) config.output_dir = std::filesystem::absolute(*out_dir).string();
    if (stage != "all" && !toxtrig::is_stage(stage)) throw toxtrig::ConfigError("--stage", "unknown stage " + stage);

    toxtrig::StageOptions options;
    options.force = force;
    if (!quiet) options.log = [](const std::string& msg) { std::cerr << msg << '\n'; };

    std::vector<toxtrig::StageOutcome> outcomes;
    if (stage == "all") {
      outcomes = toxtrig::run_pipeline(config, options);
    } else {
      outcomes.push_back(toxtrig::run_stage(stage, config, options));
    }
    if (!quiet) {
      for (const auto& o : outcomes) {
        std::cout << o.stage << (o.skipped ? " (skipped)" : "") << ":";
        for (const auto& a : o.artifacts) std::cout << ' ' << a;
        std::cout << '\n';
      }
    }
    return 0;
  } catch (const toxtrig::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(toxtrig::ExitCode::Data);
  }
}
