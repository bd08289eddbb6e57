#include "toxtrig/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "toxtrig/attribution.hpp"
#include "toxtrig/characterize.hpp"
#include "toxtrig/classifier.hpp"
#include "toxtrig/compare.hpp"
#include "toxtrig/corpus.hpp"
#include "toxtrig/errors.hpp"
#include "toxtrig/io.hpp"
#include "toxtrig/random.hpp"
#include "toxtrig/remote_scorer.hpp"
#include "toxtrig/triggers.hpp"

namespace toxtrig {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kStageVersion = "1";

constexpr const char* kCorpus = "corpus.ndjson";
constexpr const char* kCleaningReport = "cleaning_report.json";
constexpr const char* kThreads = "threads.json";
constexpr const char* kScored = "scored.ndjson";
constexpr const char* kDistribution = "distribution.json";
constexpr const char* kScaledF = "scaled_f_scores.csv";
constexpr const char* kCommunities = "communities.json";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kComparison = "comparison";

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string to_ndjson(const std::vector<json>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  return out;
}

// Tracks one stage's declared inputs and written outputs.
class StageContext {
 public:
  StageContext(std::string stage, const PipelineConfig& config, const StageOptions& options)
      : stage_(std::move(stage)), config_(config), options_(options), out_(config.output_path()) {}

  const fs::path& out() const { return out_; }
  const PipelineConfig& config() const { return config_; }

  // An artifact of an earlier stage, relative to the output directory.
  std::string artifact(const std::string& rel, std::string_view producer) {
    const fs::path p = out_ / rel;
    if (!fs::exists(p)) throw MissingStageError(stage_, std::string(producer), rel);
    std::string data = read_file(p);
    inputs_[rel] = sha256_hex(data);
    return data;
  }

  // A file outside the output directory (dumps, replay files).
  std::string external(const fs::path& p, const std::string& key) {
    std::string data = read_file(p);
    inputs_[key] = sha256_hex(data);
    return data;
  }

  void write(const std::string& rel, std::string_view contents) {
    write_file_atomic(out_ / rel, contents);
    outputs_[rel] = sha256_hex(contents);
  }

  void log(const std::string& msg) const {
    if (options_.log) options_.log(stage_ + ": " + msg);
  }

  const std::map<std::string, std::string>& inputs() const { return inputs_; }
  const std::map<std::string, std::string>& outputs() const { return outputs_; }

 private:
  std::string stage_;
  const PipelineConfig& config_;
  const StageOptions& options_;
  fs::path out_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

json load_manifest(const fs::path& out) {
  const fs::path p = out / kManifest;
  if (!fs::exists(p)) return json::object();
  json j = json::parse(read_file(p), nullptr, false);
  return j.is_object() ? j : json::object();
}

std::string fingerprint(std::string_view stage, const PipelineConfig& config,
                        const std::map<std::string, std::string>& inputs) {
  json j{{"stage", stage}, {"version", kStageVersion}, {"config", config.hash()}, {"inputs", inputs}};
  return sha256_hex(j.dump());
}

bool outputs_intact(const fs::path& out, const json& recorded) {
  if (!recorded.is_object() || recorded.empty()) return false;
  for (const auto& [rel, digest] : recorded.items()) {
    const fs::path p = out / rel;
    if (!fs::exists(p) || file_sha256(p) != digest.get<std::string>()) return false;
  }
  return true;
}

std::vector<LabeledComment> load_scored(StageContext& ctx) {
  std::istringstream in(ctx.artifact(kScored, "score"));
  return read_scored_corpus(in);
}

std::vector<std::string> selected_communities(const PipelineConfig& config, const std::vector<LabeledComment>& corpus) {
  std::set<std::string> present;
  for (const auto& c : corpus) present.insert(c.comment.community);
  if (config.communities.empty()) return {present.begin(), present.end()};
  for (const auto& c : config.communities) {
    if (!present.count(c)) throw DataError("community " + c + " does not occur in the scored corpus");
  }
  return config.communities;
}

std::vector<std::string> load_communities(StageContext& ctx) {
  json j = json::parse(ctx.artifact(kCommunities, "label-triggers"), nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw DataError(std::string(kCommunities) + " is malformed");
  return j.get<std::vector<std::string>>();
}

std::string in_community(const std::string& community, const std::string& file) {
  return "communities/" + community_dir(community) + "/" + file;
}

DatasetSplit load_split(StageContext& ctx, const std::string& community,
                        const std::map<std::string, const Comment*>& by_id) {
  json j = json::parse(ctx.artifact(in_community(community, "split.json"), "label-triggers"), nullptr, false);
  if (j.is_discarded()) throw DataError("split manifest for " + community + " is malformed");
  DatasetSplit split;
  split.seed = j.at("seed").get<std::uint64_t>();
  split.ratio = j.at("ratio").get<double>();
  for (const auto& [part, target] : {std::pair{"train", &split.train}, std::pair{"test", &split.test}}) {
    for (const auto& [cls, label] : {std::pair{"trigger", TriggerLabel::Trigger}, std::pair{"nontrigger", TriggerLabel::NonTrigger}}) {
      for (const auto& id : j.at(part).at(cls)) {
        auto it = by_id.find(id.get<std::string>());
        if (it == by_id.end()) throw DataError("split references unknown comment " + id.get<std::string>());
        target->push_back({it->first, it->second->body, label, 0});
      }
    }
  }
  return split;
}

std::map<std::string, const Comment*> index_by_id(const std::vector<LabeledComment>& corpus) {
  std::map<std::string, const Comment*> out;
  for (const auto& c : corpus) out.emplace(c.comment.id, &c.comment);
  return out;
}

LogisticModel load_model(StageContext& ctx, const std::string& community) {
  json j = json::parse(ctx.artifact(in_community(community, "model.json"), "train"), nullptr, false);
  if (j.is_discarded()) throw DataError("model for " + community + " is malformed");
  return LogisticModel::from_json(j);
}

// ---- stages ----

void stage_ingest(StageContext& ctx) {
  const auto& cfg = ctx.config();
  std::vector<RawRecord> records;
  std::size_t malformed = 0;
  for (const auto& dump : cfg.dumps) {
    std::istringstream in(ctx.external(cfg.resolve(dump), "dump:" + dump));
    ParseResult parsed = parse_dump(in);
    malformed += parsed.malformed;
    records.insert(records.end(), std::make_move_iterator(parsed.records.begin()),
                   std::make_move_iterator(parsed.records.end()));
  }
  CleanResult cleaned = clean(records, cfg.cleaning);
  cleaned.report[RemovalReason::Malformed] += malformed;

  auto threads = build_threads(cleaned.comments);
  std::vector<json> lines;
  for (const auto& t : threads) {
    std::vector<const Comment*> ordered;
    for (const auto& c : t.members) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(), [](const Comment* a, const Comment* b) {
      return std::tie(a->created_at, a->id) < std::tie(b->created_at, b->id);
    });
    for (const auto* c : ordered) lines.push_back(record_json(*c));
  }
  ctx.write(kCorpus, to_ndjson(lines));
  ctx.write(kCleaningReport, json(cleaned.report).dump(2) + "\n");
  ctx.write(kThreads, json(threads).dump() + "\n");
  ctx.log("kept " + std::to_string(cleaned.report.kept) + " of " + std::to_string(cleaned.report.input()) +
          " records in " + std::to_string(threads.size()) + " threads");
}

void stage_score(StageContext& ctx) {
  const auto& cfg = ctx.config();
  std::istringstream in(ctx.artifact(kCorpus, "ingest"));
  std::vector<Comment> comments;
  for (auto& r : parse_dump(in).records) comments.push_back(Comment{std::move(r)});
  if (cfg.scorer.kind == ScorerKind::Replay) ctx.external(cfg.resolve(cfg.scorer.replay_path), "replay");
  if (cfg.scorer.kind == ScorerKind::Lexicon && !cfg.scorer.lexicon_path.empty()) {
    ctx.external(cfg.resolve(cfg.scorer.lexicon_path), "lexicon");
  }

  auto scorer = make_scorer(cfg);
  const auto scored = score_corpus(comments, *scorer, cfg.scorer.parallelism);
  if (cfg.scorer.kind == ScorerKind::Remote && !scored.empty() &&
      std::all_of(scored.begin(), scored.end(), [](const ScoredComment& s) { return s.score.reason == reasons::kRemoteError; })) {
    throw ServiceError("remote scorer failed for every comment");
  }

  std::vector<json> lines;
  std::vector<ToxicityLabel> all;
  std::map<std::string, std::vector<ToxicityLabel>> per_community;
  for (const auto& s : scored) {
    const auto label = categorize(s.score.value, cfg.thresholds);
    lines.push_back(scored_record_json(s, label));
    all.push_back(label);
    per_community[s.comment.community].push_back(label);
  }
  json dist{{"overall", distribution(all)}, {"communities", json::object()}};
  for (const auto& [c, labels] : per_community) dist["communities"][c] = distribution(labels);
  ctx.write(kScored, to_ndjson(lines));
  ctx.write(kDistribution, dist.dump(2) + "\n");
  ctx.log("scored " + std::to_string(scored.size()) + " comments with the " + scorer->name() + " scorer");
}

void stage_characterize(StageContext& ctx) {
  const auto& cfg = ctx.config();
  const auto corpus = load_scored(ctx);
  std::vector<LabeledText> texts;
  for (const auto& c : corpus) texts.push_back({c.comment.body, c.label});
  const TermTable table = term_stats(texts, cfg.tokenizer, cfg.characterize_min_count);
  const auto ranked = rank_terms(table);
  ctx.write(kScaledF, scaled_f_csv(ranked));
  ctx.log(std::to_string(ranked.size()) + " terms scored");
}

void stage_label_triggers(StageContext& ctx) {
  const auto& cfg = ctx.config();
  const auto corpus = load_scored(ctx);
  const auto communities = selected_communities(cfg, corpus);
  for (const auto& community : communities) {
    std::vector<Comment> comments;
    LabelMap labels;
    for (const auto& c : corpus) {
      if (c.comment.community != community) continue;
      comments.push_back(c.comment);
      labels[c.comment.id] = c.label;
    }
    const auto threads = build_threads(comments);
    const auto triggers = label_triggers(threads, labels, cfg.triggers);
    if (triggers.size() < 2) {
      throw DataError("community " + community + " has " + std::to_string(triggers.size()) +
                      " triggers; at least 2 are needed for a dataset");
    }
    const auto candidates = nontrigger_candidates(threads, labels, triggers);
    const auto sampled = sample_nontriggers(candidates, triggers.size(), derive_seed(cfg.seed, "nontriggers/" + community));

    std::map<std::string, std::pair<const Comment*, const CommentThread*>> where;
    for (const auto& t : threads) {
      for (const auto& c : t.members) where[c.id] = {&c, &t};
    }
    std::vector<TriggerExample> pos, neg;
    for (const auto& t : triggers) pos.push_back({t.id, where[t.id].first->body, TriggerLabel::Trigger, t.toxic_children});
    for (const auto& id : sampled) {
      const auto [c, t] = where[id];
      neg.push_back({id, c->body, TriggerLabel::NonTrigger, toxic_child_count(*t, id, labels, cfg.triggers.child_scope)});
    }
    std::vector<TriggerExample> all = pos;
    all.insert(all.end(), neg.begin(), neg.end());
    const DatasetSplit split = make_dataset(std::move(pos), std::move(neg), cfg.split_ratio,
                                            derive_seed(cfg.seed, "split/" + community));
    ctx.write(in_community(community, "triggers.csv"), trigger_csv(all));
    ctx.write(in_community(community, "split.json"), split_manifest(split).dump(2) + "\n");
    ctx.log(community + ": " + std::to_string(triggers.size()) + " triggers, " + std::to_string(split.train.size()) +
            " train / " + std::to_string(split.test.size()) + " test");
  }
  ctx.write(kCommunities, json(communities).dump(2) + "\n");
}

void stage_train(StageContext& ctx) {
  const auto& cfg = ctx.config();
  const auto corpus = load_scored(ctx);
  const auto by_id = index_by_id(corpus);
  for (const auto& community : load_communities(ctx)) {
    const DatasetSplit split = load_split(ctx, community, by_id);
    Hyperparams hp = cfg.classifier;
    hp.seed = cfg.seed;
    const TrainResult result = train(split, hp, cfg.tokenizer);
    ctx.write(in_community(community, "model.json"), result.model.to_json().dump() + "\n");
    json training{{"community", community},
                  {"examples", split.train.size()},
                  {"vocabulary_size", result.model.vocabulary().size()},
                  {"loss_initial", result.loss_history.front()},
                  {"loss_final", result.loss_history.back()},
                  {"loss_history", result.loss_history}};
    ctx.write(in_community(community, "training.json"), training.dump(2) + "\n");
    ctx.log(community + ": loss " + format_double(result.loss_history.front()) + " -> " +
            format_double(result.loss_history.back()));
  }
}

void stage_evaluate(StageContext& ctx) {
  const auto corpus = load_scored(ctx);
  const auto by_id = index_by_id(corpus);
  for (const auto& community : load_communities(ctx)) {
    const DatasetSplit split = load_split(ctx, community, by_id);
    const LogisticModel model = load_model(ctx, community);
    const EvalReport report = evaluate(model, split.test);
    json j = report;
    j["community"] = community;
    j["threshold"] = 0.5;
    ctx.write(in_community(community, "eval.json"), j.dump(2) + "\n");
    ctx.log(community + ": F1 " + format_double(report.f1) + ", accuracy " + format_double(report.accuracy));
  }
}

void stage_attribute(StageContext& ctx) {
  const auto& cfg = ctx.config();
  const auto corpus = load_scored(ctx);
  const auto by_id = index_by_id(corpus);
  for (const auto& community : load_communities(ctx)) {
    const DatasetSplit split = load_split(ctx, community, by_id);
    const LogisticModel model = load_model(ctx, community);

    std::vector<CommentText> triggers;
    for (const auto* part : {&split.train, &split.test}) {
      for (const auto& e : *part) {
        if (e.label == TriggerLabel::Trigger) triggers.push_back({e.id, e.text});
      }
    }
    std::sort(triggers.begin(), triggers.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    AttributionConfig method = cfg.attribution.method;
    method.seed = derive_seed(cfg.seed, "attribution/" + community);
    AttributionReport report = make_report(attribute_comments(model, triggers, method));

    const TopTerms top = aggregate_top_terms(report.comments, cfg.attribution.top_k);
    json j = report;
    j["community"] = community;
    j["output"] = to_string(method.output);
    json top_terms = json::array();
    for (const auto& t : top.terms) top_terms.push_back(t.term);
    j["top_k"] = top_terms;
    j["top_k_note"] = top.note ? json(*top.note) : json(nullptr);

    std::vector<std::string> trigger_terms;
    for (std::size_t i = 0; i < std::min(cfg.attribution.context_top, report.ranking.size()); ++i) {
      trigger_terms.push_back(report.ranking[i].term);
    }
    std::vector<std::string> texts;
    for (const auto& c : corpus) {
      if (c.comment.community == community) texts.push_back(c.comment.body);
    }
    const auto context = context_terms(texts, trigger_terms, cfg.attribution.context_min_count, model.tokenizer());

    ctx.write(in_community(community, "attribution.json"), j.dump() + "\n");
    ctx.write(in_community(community, "ranked_terms.csv"), ranked_terms_csv(report.ranking));
    ctx.write(in_community(community, "context_terms.csv"), context_terms_csv(context));
    ctx.log(community + ": attributed " + std::to_string(report.comments.size()) + " triggers");
  }
}

void stage_compare(StageContext& ctx) {
  const auto& cfg = ctx.config();
  std::vector<TriggerRanking> rankings;
  json digests = json::object();
  for (const auto& community : load_communities(ctx)) {
    const std::string rel = in_community(community, "attribution.json");
    const std::string data = ctx.artifact(rel, "attribute");
    json j = json::parse(data, nullptr, false);
    if (j.is_discarded()) throw DataError(rel + " is malformed");
    TriggerRanking r{community, {}};
    for (const auto& t : j.at("ranking")) r.terms.push_back(t.at("term").get<std::string>());
    rankings.push_back(std::move(r));
    digests[community] = sha256_hex(data);
  }
  json metadata{{"pipeline_version", kPipelineVersion},
                {"config_hash", cfg.hash()},
                {"seed", cfg.seed},
                {"attribution_digests", digests}};
  const json report = comparison_report(rankings, cfg.compare_k, metadata);
  const std::string base = kComparison;
  ctx.write(base + ".json", report.dump(2) + "\n");
  ctx.write(base + ".md", comparison_markdown(report));
  ctx.log("compared " + std::to_string(rankings.size()) + " communities");
}

using StageFn = void (*)(StageContext&);

StageFn stage_fn(std::string_view stage) {
  static const std::map<std::string_view, StageFn> kFns = {
      {"ingest", stage_ingest},     {"score", stage_score},       {"characterize", stage_characterize},
      {"label-triggers", stage_label_triggers}, {"train", stage_train}, {"evaluate", stage_evaluate},
      {"attribute", stage_attribute}, {"compare", stage_compare}};
  auto it = kFns.find(stage);
  if (it == kFns.end()) throw ConfigError("--stage", "unknown stage " + std::string(stage));
  return it->second;
}

// Digests of the inputs a stage will read, computed before running it for the up-to-date check.
// Returns nullopt when some input is missing; the stage itself then reports which.
std::optional<std::map<std::string, std::string>> probe_inputs(std::string_view stage, const PipelineConfig& cfg) {
  StageOptions quiet;
  StageContext probe(std::string(stage), cfg, quiet);
  try {
    if (stage == "ingest") {
      for (const auto& d : cfg.dumps) probe.external(cfg.resolve(d), "dump:" + d);
    } else if (stage == "score") {
      probe.artifact(kCorpus, "ingest");
      if (cfg.scorer.kind == ScorerKind::Replay) probe.external(cfg.resolve(cfg.scorer.replay_path), "replay");
      if (cfg.scorer.kind == ScorerKind::Lexicon && !cfg.scorer.lexicon_path.empty()) {
        probe.external(cfg.resolve(cfg.scorer.lexicon_path), "lexicon");
      }
    } else if (stage == "characterize" || stage == "label-triggers") {
      probe.artifact(kScored, "score");
    } else {
      if (stage != "compare") probe.artifact(kScored, "score");
      for (const auto& c : load_communities(probe)) {
        if (stage == "compare") {
          probe.artifact(in_community(c, "attribution.json"), "attribute");
          continue;
        }
        probe.artifact(in_community(c, "split.json"), "label-triggers");
        if (stage != "train") probe.artifact(in_community(c, "model.json"), "train");
      }
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return probe.inputs();
}

}  // namespace

bool is_stage(std::string_view name) {
  return std::find(kStages.begin(), kStages.end(), name) != kStages.end();
}

std::unique_ptr<ToxicityScorer> make_scorer(const PipelineConfig& config) {
  const auto& s = config.scorer;
  switch (s.kind) {
    case ScorerKind::Replay:
      return std::make_unique<ReplayScorer>(ReplayScorer::from_file(config.resolve(s.replay_path)));
    case ScorerKind::Lexicon:
      if (s.lexicon_path.empty()) {
        return std::make_unique<LexiconScorer>(LexiconScorer::bundled_lexicon(), s.lexicon_bias, config.tokenizer);
      }
      return std::make_unique<LexiconScorer>(LexiconScorer::from_file(config.resolve(s.lexicon_path), s.lexicon_bias));
    case ScorerKind::Remote: {
      RemoteScorerConfig remote = s.remote;
      if (!remote.cache_path.empty() && remote.cache_path.is_relative()) {
        remote.cache_path = config.resolve(remote.cache_path.string());
        std::error_code ec;
        fs::create_directories(remote.cache_path.parent_path(), ec);
      }
      return RemoteScorer::from_config(remote);
    }
  }
  throw ConfigError("scorer.kind", "unsupported scorer");
}

std::string community_dir(std::string_view community) {
  std::string out;
  for (char c : community) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

StageOutcome run_stage(std::string_view stage, const PipelineConfig& config, const StageOptions& options) {
  config.validate();
  const StageFn fn = stage_fn(stage);
  const fs::path out = config.output_path();
  json manifest = load_manifest(out);
  const std::string name(stage);

  StageOutcome outcome{name, false, {}};
  if (!options.force) {
    const auto inputs = probe_inputs(stage, config);
    const json& prev = manifest.contains("stages") ? manifest["stages"].value(name, json::object()) : json::object();
    if (inputs && prev.value("fingerprint", "") == fingerprint(stage, config, *inputs) &&
        outputs_intact(out, prev.value("outputs", json::object()))) {
      outcome.skipped = true;
      for (const auto& [rel, _] : prev["outputs"].items()) outcome.artifacts.push_back(rel);
      if (options.log) options.log(name + ": up to date");
      return outcome;
    }
  }

  StageContext ctx(name, config, options);
  const std::string started = utc_now();
  fn(ctx);

  manifest["pipeline_version"] = kPipelineVersion;
  manifest["config_hash"] = config.hash();
  manifest["config"] = config.to_json();
  manifest["stages"][name] = json{{"version", kStageVersion},
                                  {"fingerprint", fingerprint(stage, config, ctx.inputs())},
                                  {"inputs", ctx.inputs()},
                                  {"outputs", ctx.outputs()},
                                  {"started_at", started},
                                  {"finished_at", utc_now()}};
  write_file_atomic(out / kManifest, manifest.dump(2) + "\n");
  for (const auto& [rel, _] : ctx.outputs()) outcome.artifacts.push_back(rel);
  return outcome;
}

std::vector<StageOutcome> run_pipeline(const PipelineConfig& config, const StageOptions& options) {
  std::vector<StageOutcome> out;
  for (auto stage : kStages) out.push_back(run_stage(stage, config, options));
  return out;
}

}  // namespace toxtrig
