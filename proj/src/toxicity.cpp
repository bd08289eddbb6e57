#include "toxtrig/toxicity.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "toxtrig/errors.hpp"

namespace toxtrig {

using nlohmann::json;

std::string_view to_string(ToxicityLabel label) {
  switch (label) {
    case ToxicityLabel::Toxic: return "toxic";
    case ToxicityLabel::NonToxic: return "nontoxic";
    case ToxicityLabel::Ambiguous: return "ambiguous";
    case ToxicityLabel::Other: return "other";
  }
  return "other";
}

ToxicityLabel parse_toxicity_label(std::string_view s) {
  for (std::size_t i = 0; i < kToxicityLabelCount; ++i) {
    const auto l = static_cast<ToxicityLabel>(i);
    if (to_string(l) == s) return l;
  }
  throw DataError("unknown toxicity label: " + std::string(s));
}

void Thresholds::validate() const {
  if (!(nontoxic_max >= 0.0 && nontoxic_max < toxic_min && toxic_min <= 1.0)) {
    throw ConfigError("thresholds", "require 0 <= nontoxic_max < toxic_min <= 1");
  }
}

// Weights are additive log-odds: one strong term pushes a neutral comment past 0.8,
// a single mild insult lands in the ambiguous band.
const std::map<std::string, double>& LexiconScorer::bundled_lexicon() {
  static const std::map<std::string, double> kLexicon = {
      {"asshole", 6.0},  {"bastard", 5.5}, {"bitch", 6.0},   {"bullshit", 5.0}, {"cb", 5.5},
      {"cheebye", 6.0},  {"crap", 2.5},    {"cunt", 6.5},    {"damn", 1.5},     {"dick", 5.0},
      {"dumb", 3.0},     {"dumbass", 5.5}, {"fuck", 6.0},    {"fucked", 6.0},   {"fucking", 6.0},
      {"fuckin", 6.0},   {"idiot", 4.5},   {"idiots", 4.5},  {"imbecile", 4.5}, {"jerk", 3.0},
      {"kanina", 6.0},   {"knn", 5.5},     {"loser", 3.5},   {"moron", 4.5},    {"morons", 4.5},
      {"motherfucker", 7.0}, {"nabei", 5.0}, {"piss", 3.0},  {"pissed", 3.0},   {"retard", 5.5},
      {"retarded", 5.5}, {"scum", 4.0},    {"shit", 5.0},    {"shitty", 4.5},   {"shut", 1.0},
      {"stfu", 5.5},     {"stupid", 3.5},  {"sucks", 2.0},   {"trash", 2.5},    {"ugly", 2.5},
      {"wtf", 3.0},
  };
  return kLexicon;
}

LexiconScorer::LexiconScorer() : LexiconScorer(bundled_lexicon()) {}

LexiconScorer::LexiconScorer(std::map<std::string, double> weights, double bias, TokenizerConfig tokenizer)
    : weights_(std::move(weights)), bias_(bias), tokenizer_(tokenizer) {}

LexiconScorer LexiconScorer::from_file(const std::filesystem::path& path, double bias) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  std::map<std::string, double> weights;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected term<TAB>weight");
    }
    try {
      weights[ascii_lower(trim(body.substr(0, tab)))] = std::stod(std::string(body.substr(tab + 1)));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad weight");
    }
  }
  return LexiconScorer(std::move(weights), bias);
}

ScoreResult LexiconScorer::score(std::string_view, std::string_view text) {
  double z = bias_;
  for (const auto& tok : tokenize(text, tokenizer_)) {
    if (auto it = weights_.find(tok); it != weights_.end()) z += it->second;
  }
  return ScoreResult::present(1.0 / (1.0 + std::exp(-z)));
}

ReplayScorer::ReplayScorer(std::unordered_map<std::string, std::optional<double>> scores)
    : scores_(std::move(scores)) {}

ReplayScorer ReplayScorer::from_stream(std::istream& in) {
  std::unordered_map<std::string, std::optional<double>> scores;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    const auto where = "replay line " + std::to_string(lineno);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("score")) {
      throw DataError(where + ": expected {\"id\": string, \"score\": number|null}");
    }
    std::optional<double> value;
    if (!j["score"].is_null()) {
      if (!j["score"].is_number()) throw DataError(where + ": score must be a number or null");
      value = j["score"].get<double>();
      if (!(*value >= 0.0 && *value <= 1.0)) throw DataError(where + ": score outside [0, 1]");
    }
    if (!scores.emplace(j["id"].get<std::string>(), value).second) {
      throw DataError(where + ": duplicate id " + j["id"].get<std::string>());
    }
  }
  return ReplayScorer(std::move(scores));
}

ReplayScorer ReplayScorer::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open replay file " + path.string());
  return from_stream(in);
}

ScoreResult ReplayScorer::score(std::string_view comment_id, std::string_view) {
  auto it = scores_.find(std::string(comment_id));
  if (it == scores_.end()) return ScoreResult::absent(std::string(reasons::kNotInReplay));
  if (!it->second) return ScoreResult::absent(std::string(reasons::kReplayNull));
  return ScoreResult::present(*it->second);
}

std::vector<ScoredComment> score_corpus(std::span<const Comment> comments, ToxicityScorer& scorer,
                                        std::size_t parallelism) {
  std::vector<ScoredComment> out(comments.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < comments.size(); i = next++) {
      ScoreResult r;
      try {
        r = scorer.score(comments[i].id, comments[i].body);
      } catch (const std::exception&) {
        r = ScoreResult::absent(std::string(reasons::kScorerError));
      }
      if (r.value && !(*r.value >= 0.0 && *r.value <= 1.0)) r = ScoreResult::absent(std::string(reasons::kInvalidScore));
      out[i] = ScoredComment{comments[i], std::move(r)};
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, comments.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return out;
}

ToxicityLabel categorize(std::optional<double> score, const Thresholds& t) {
  if (!score || std::isnan(*score)) return ToxicityLabel::Other;
  if (*score >= t.toxic_min) return ToxicityLabel::Toxic;
  if (*score <= t.nontoxic_max) return ToxicityLabel::NonToxic;
  return ToxicityLabel::Ambiguous;
}

double Distribution::proportion(ToxicityLabel l) const {
  return total == 0 ? 0.0 : static_cast<double>(count(l)) / static_cast<double>(total);
}

Distribution distribution(std::span<const ToxicityLabel> labels) {
  Distribution d;
  for (auto l : labels) ++d.counts[static_cast<std::size_t>(l)];
  d.total = labels.size();
  return d;
}

void to_json(json& j, const Distribution& d) {
  json counts = json::object();
  json props = json::object();
  for (std::size_t i = 0; i < kToxicityLabelCount; ++i) {
    const auto l = static_cast<ToxicityLabel>(i);
    counts[std::string(to_string(l))] = d.count(l);
    props[std::string(to_string(l))] = d.proportion(l);
  }
  j = json{{"total", d.total}, {"empty", d.empty()}, {"counts", counts}, {"proportions", props}};
}

json scored_record_json(const ScoredComment& sc, ToxicityLabel label) {
  json j = record_json(sc.comment);
  j["toxicity_score"] = sc.score.value ? json(*sc.score.value) : json(nullptr);
  j["toxicity_label"] = to_string(label);
  if (!sc.score.value) j["toxicity_reason"] = sc.score.reason;
  return j;
}

std::vector<LabeledComment> read_scored_corpus(std::istream& in) {
  std::vector<LabeledComment> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto rec = parse_record(line);
    json j = json::parse(line, nullptr, false);
    if (!rec || j.is_discarded() || !j.contains("toxicity_label") || !j["toxicity_label"].is_string()) {
      throw DataError("scored corpus line " + std::to_string(lineno) + " is malformed");
    }
    LabeledComment lc{Comment{*rec}, std::nullopt, parse_toxicity_label(j["toxicity_label"].get<std::string>())};
    if (j.contains("toxicity_score") && j["toxicity_score"].is_number()) lc.score = j["toxicity_score"].get<double>();
    out.push_back(std::move(lc));
  }
  return out;
}

}  // namespace toxtrig
