#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "toxtrig/errors.hpp"
#include "toxtrig/toxicity.hpp"

using namespace toxtrig;

namespace {

Comment make(const std::string& id, const std::string& body) {
  Comment c;
  c.id = id;
  c.thread_id = "t3_p";
  c.author = "a";
  c.body = body;
  c.created_at = 1;
  c.community = "singapore";
  return c;
}

}  // namespace

TEST_CASE("categorize follows the inclusive table boundaries") {
  CHECK(categorize(0.80) == ToxicityLabel::Toxic);
  CHECK(categorize(1.0) == ToxicityLabel::Toxic);
  CHECK(categorize(0.20) == ToxicityLabel::NonToxic);
  CHECK(categorize(0.0) == ToxicityLabel::NonToxic);
  CHECK(categorize(0.50) == ToxicityLabel::Ambiguous);
  CHECK(categorize(std::nextafter(0.8, 0.0)) == ToxicityLabel::Ambiguous);
  CHECK(categorize(std::nextafter(0.2, 1.0)) == ToxicityLabel::Ambiguous);
  CHECK(categorize(std::nullopt) == ToxicityLabel::Other);
}

TEST_CASE("categorize is monotone in the score") {
  const auto rank = [](ToxicityLabel l) {
    return l == ToxicityLabel::NonToxic ? 0 : l == ToxicityLabel::Ambiguous ? 1 : 2;
  };
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    CHECK(rank(categorize(a)) <= rank(categorize(b)));
  }
}

TEST_CASE("thresholds validation") {
  CHECK_NOTHROW(Thresholds{}.validate());
  CHECK_THROWS_AS((Thresholds{0.2, 0.2}.validate()), ConfigError);
  CHECK_THROWS_AS((Thresholds{1.1, 0.2}.validate()), ConfigError);
  CHECK_THROWS_AS((Thresholds{0.8, -0.1}.validate()), ConfigError);
}

TEST_CASE("lexicon scorer: neutral text scores sigmoid(-4)") {
  LexiconScorer scorer;
  const auto r = scorer.score("id", "the weather in the east is lovely");
  REQUIRE(r.value.has_value());
  // 1 / (1 + e^4), computed independently.
  CHECK(*r.value == doctest::Approx(0.017986209962091559).epsilon(1e-15));
  CHECK(categorize(r.value) == ToxicityLabel::NonToxic);
}

TEST_CASE("lexicon scorer sums term weights per occurrence") {
  LexiconScorer scorer({{"bad", 2.0}, {"worse", 3.0}}, -4.0);
  CHECK(*scorer.score("", "bad").value == doctest::Approx(1.0 / (1.0 + std::exp(2.0))));
  CHECK(*scorer.score("", "BAD bad worse").value == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))));
  LexiconScorer bundled;
  CHECK(categorize(bundled.score("", "you are a fucking idiot").value) == ToxicityLabel::Toxic);
}

TEST_CASE("replay scorer returns stored values or an absent reason") {
  std::istringstream in("{\"id\":\"a\",\"score\":0.93}\n\n{\"id\":\"b\",\"score\":null}\n");
  auto scorer = ReplayScorer::from_stream(in);
  CHECK(scorer.size() == 2);
  CHECK(*scorer.score("a", "").value == 0.93);
  const auto missing = scorer.score("zzz", "");
  CHECK_FALSE(missing.value.has_value());
  CHECK(missing.reason == reasons::kNotInReplay);
  CHECK(scorer.score("b", "").reason == reasons::kReplayNull);
}

TEST_CASE("replay file errors") {
  std::istringstream out_of_range("{\"id\":\"a\",\"score\":1.5}\n");
  CHECK_THROWS_AS(ReplayScorer::from_stream(out_of_range), DataError);
  std::istringstream dup("{\"id\":\"a\",\"score\":0.1}\n{\"id\":\"a\",\"score\":0.2}\n");
  CHECK_THROWS_AS(ReplayScorer::from_stream(dup), DataError);
  std::istringstream bad("{\"id\":1,\"score\":0.1}\n");
  CHECK_THROWS_AS(ReplayScorer::from_stream(bad), DataError);
}

namespace {

class FlakyScorer final : public ToxicityScorer {
 public:
  ScoreResult score(std::string_view id, std::string_view) override {
    if (id == "boom") throw std::runtime_error("backend exploded");
    if (id == "big") return ScoreResult::present(3.0);
    return ScoreResult::present(static_cast<double>(id.size()) / 10.0);
  }
  std::string name() const override { return "flaky"; }
};

}  // namespace

TEST_CASE("score_corpus keeps order, never aborts, and is parallel-safe") {
  std::vector<Comment> cs;
  for (int i = 0; i < 200; ++i) cs.push_back(make(std::string(static_cast<std::size_t>(i % 9 + 1), 'x'), "t"));
  cs.push_back(make("boom", "t"));
  cs.push_back(make("big", "t"));
  FlakyScorer scorer;
  const auto serial = score_corpus(cs, scorer, 1);
  const auto parallel = score_corpus(cs, scorer, 8);
  REQUIRE(serial.size() == cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(serial[i].comment.id == cs[i].id);
    CHECK(parallel[i].comment.id == cs[i].id);
    CHECK(serial[i].score.value == parallel[i].score.value);
  }
  CHECK(serial[200].score.reason == reasons::kScorerError);
  CHECK(serial[201].score.reason == reasons::kInvalidScore);
}

TEST_CASE("distribution counts and proportions") {
  const std::vector<ToxicityLabel> labels{ToxicityLabel::Toxic, ToxicityLabel::NonToxic, ToxicityLabel::NonToxic,
                                          ToxicityLabel::Other};
  const auto d = distribution(labels);
  CHECK(d.total == 4);
  CHECK(d.count(ToxicityLabel::NonToxic) == 2);
  CHECK(d.proportion(ToxicityLabel::Toxic) == 0.25);
  double sum = 0;
  for (std::size_t i = 0; i < kToxicityLabelCount; ++i) sum += d.proportion(static_cast<ToxicityLabel>(i));
  CHECK(std::abs(sum - 1.0) < 1e-12);

  std::vector<ToxicityLabel> zeros;
  for (int i = 0; i < 10; ++i) zeros.push_back(categorize(0.0));
  CHECK(distribution(zeros).proportion(ToxicityLabel::NonToxic) == 1.0);

  const auto empty = distribution({});
  CHECK(empty.empty());
  CHECK(empty.proportion(ToxicityLabel::Toxic) == 0.0);
  const nlohmann::json j = empty;
  CHECK(j["empty"] == true);
  CHECK(j["counts"]["toxic"] == 0);
}

TEST_CASE("scored corpus lines round-trip") {
  ScoredComment sc{make("c1", "hello"), ScoreResult::present(0.85)};
  ScoredComment missing{make("c2", "hola"), ScoreResult::absent("not_in_replay")};
  std::stringstream ss;
  ss << scored_record_json(sc, categorize(sc.score.value)).dump() << "\n"
     << scored_record_json(missing, categorize(missing.score.value)).dump() << "\n";
  const auto back = read_scored_corpus(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].label == ToxicityLabel::Toxic);
  CHECK(back[0].score == 0.85);
  CHECK(back[1].label == ToxicityLabel::Other);
  CHECK_FALSE(back[1].score.has_value());
  const auto j = scored_record_json(missing, ToxicityLabel::Other);
  CHECK(j["toxicity_score"].is_null());
  CHECK(j["toxicity_reason"] == "not_in_replay");
}
