#include "toxtrig/config.hpp"

#include <yaml-cpp/yaml.h>

#include <functional>
#include <map>
#include <set>

#include "toxtrig/errors.hpp"
#include "toxtrig/io.hpp"

namespace toxtrig {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <typename T>
  void get(const std::string& k, T& out) {
    seen_.insert(k);
    if (!node_ || !node_[k]) return;
    try {
      out = node_[k].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(key(k), "has the wrong type");
    }
  }

  void section(const std::string& k, const std::function<void(Reader&)>& body) {
    seen_.insert(k);
    YAML::Node child = node_ ? node_[k] : YAML::Node();
    Reader r(child, key(k));
    body(r);
    r.finish();
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto name = kv.first.as<std::string>();
      if (!seen_.count(name)) throw ConfigError(key(name), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

ScorerKind parse_scorer_kind(const std::string& s) {
  if (s == "lexicon") return ScorerKind::Lexicon;
  if (s == "replay") return ScorerKind::Replay;
  if (s == "remote") return ScorerKind::Remote;
  throw ConfigError("scorer.kind", "expected lexicon, replay or remote, got " + s);
}

std::string_view to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::Lexicon: return "lexicon";
    case ScorerKind::Replay: return "replay";
    case ScorerKind::Remote: return "remote";
  }
  return "lexicon";
}

}  // namespace

std::filesystem::path PipelineConfig::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

void PipelineConfig::validate() const {
  if (dumps.empty()) throw ConfigError("input.dumps", "at least one dump file is required");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  if (scorer.parallelism < 1) throw ConfigError("scorer.parallelism", "must be >= 1");
  if (scorer.kind == ScorerKind::Replay && scorer.replay_path.empty()) {
    throw ConfigError("scorer.replay.path", "required for the replay scorer");
  }
  if (scorer.kind == ScorerKind::Remote) {
    if (scorer.remote.endpoint.empty()) throw ConfigError("scorer.remote.endpoint", "must not be empty");
    if (scorer.remote.max_attempts < 1) throw ConfigError("scorer.remote.max_attempts", "must be >= 1");
  }
  thresholds.validate();
  triggers.validate();
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("triggers.split_ratio", "must lie in (0, 1)");
  classifier.validate();
  attribution.method.validate();
  if (attribution.top_k < 1) throw ConfigError("attribution.top_k", "must be >= 1");
  if (attribution.context_top < 1) throw ConfigError("attribution.context_top", "must be >= 1");
  for (auto k : compare_k) {
    if (k < 1) throw ConfigError("compare.k", "entries must be >= 1");
  }
}

json PipelineConfig::to_json() const {
  json remote{{"endpoint", scorer.remote.endpoint},
              {"api_key_env", scorer.remote.api_key_env},
              {"max_attempts", scorer.remote.max_attempts},
              {"initial_backoff_ms", scorer.remote.initial_backoff.count()},
              {"cache_path", scorer.remote.cache_path.string()}};
  return json{
      {"input", {{"dumps", dumps}}},
      {"output_dir", output_dir},
      {"cleaning", {{"author_denylist", cleaning.author_denylist}, {"bot_suffix", cleaning.bot_suffix}}},
      {"scorer",
       {{"kind", to_string(scorer.kind)},
        {"parallelism", scorer.parallelism},
        {"replay", {{"path", scorer.replay_path}}},
        {"lexicon", {{"path", scorer.lexicon_path}, {"bias", scorer.lexicon_bias}}},
        {"remote", remote}}},
      {"thresholds", {{"toxic_min", thresholds.toxic_min}, {"nontoxic_max", thresholds.nontoxic_max}}},
      {"tokenizer", {{"lowercase", tokenizer.lowercase}, {"drop_numeric", tokenizer.drop_numeric}}},
      {"characterize", {{"min_count", characterize_min_count}}},
      {"triggers", {{"n", triggers.n}, {"child_scope", to_string(triggers.child_scope)}, {"split_ratio", split_ratio}}},
      {"communities", communities},
      {"classifier", classifier},
      {"attribution",
       {{"max_exact_tokens", attribution.method.max_exact_tokens},
        {"permutations", attribution.method.permutations},
        {"output", to_string(attribution.method.output)},
        {"parallelism", attribution.method.parallelism},
        {"top_k", attribution.top_k},
        {"context_top", attribution.context_top},
        {"context_min_count", attribution.context_min_count}}},
      {"compare", {{"k", compare_k}}},
      {"seeds", {{"global", seed}}}};
}

std::string PipelineConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  return sha256_hex(j.dump());
}

PipelineConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  PipelineConfig c;
  c.base_dir = base_dir;
  Reader r(root, "");
  r.section("input", [&](Reader& s) { s.get("dumps", c.dumps); });
  r.get("output_dir", c.output_dir);
  r.section("cleaning", [&](Reader& s) {
    s.get("author_denylist", c.cleaning.author_denylist);
    s.get("bot_suffix", c.cleaning.bot_suffix);
  });
  r.section("scorer", [&](Reader& s) {
    std::string kind = std::string(to_string(c.scorer.kind));
    s.get("kind", kind);
    c.scorer.kind = parse_scorer_kind(kind);
    s.get("parallelism", c.scorer.parallelism);
    s.section("replay", [&](Reader& t) { t.get("path", c.scorer.replay_path); });
    s.section("lexicon", [&](Reader& t) {
      t.get("path", c.scorer.lexicon_path);
      t.get("bias", c.scorer.lexicon_bias);
    });
    s.section("remote", [&](Reader& t) {
      t.get("endpoint", c.scorer.remote.endpoint);
      t.get("api_key_env", c.scorer.remote.api_key_env);
      t.get("max_attempts", c.scorer.remote.max_attempts);
      long long backoff = c.scorer.remote.initial_backoff.count();
      t.get("initial_backoff_ms", backoff);
      c.scorer.remote.initial_backoff = std::chrono::milliseconds(backoff);
      std::string cache;
      t.get("cache_path", cache);
      c.scorer.remote.cache_path = cache;
    });
  });
  r.section("thresholds", [&](Reader& s) {
    s.get("toxic_min", c.thresholds.toxic_min);
    s.get("nontoxic_max", c.thresholds.nontoxic_max);
  });
  r.section("tokenizer", [&](Reader& s) {
    s.get("lowercase", c.tokenizer.lowercase);
    s.get("drop_numeric", c.tokenizer.drop_numeric);
  });
  r.section("characterize", [&](Reader& s) { s.get("min_count", c.characterize_min_count); });
  r.section("triggers", [&](Reader& s) {
    s.get("n", c.triggers.n);
    std::string scope = std::string(to_string(c.triggers.child_scope));
    s.get("child_scope", scope);
    c.triggers.child_scope = parse_child_scope(scope);
    s.get("split_ratio", c.split_ratio);
  });
  r.get("communities", c.communities);
  r.section("classifier", [&](Reader& s) {
    s.get("learning_rate", c.classifier.learning_rate);
    s.get("l2", c.classifier.l2);
    s.get("epochs", c.classifier.epochs);
    s.get("max_ngram", c.classifier.max_ngram);
    s.get("min_feature_count", c.classifier.min_feature_count);
  });
  r.section("attribution", [&](Reader& s) {
    s.get("max_exact_tokens", c.attribution.method.max_exact_tokens);
    s.get("permutations", c.attribution.method.permutations);
    std::string output = std::string(to_string(c.attribution.method.output));
    s.get("output", output);
    c.attribution.method.output = parse_output_space(output);
    s.get("parallelism", c.attribution.method.parallelism);
    s.get("top_k", c.attribution.top_k);
    s.get("context_top", c.attribution.context_top);
    s.get("context_min_count", c.attribution.context_min_count);
  });
  r.section("compare", [&](Reader& s) { s.get("k", c.compare_k); });
  r.section("seeds", [&](Reader& s) { s.get("global", c.seed); });
  r.finish();
  c.classifier.seed = c.seed;
  c.attribution.method.seed = c.seed;
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_config(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace toxtrig
