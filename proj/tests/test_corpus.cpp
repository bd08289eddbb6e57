#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "toxtrig/corpus.hpp"
#include "toxtrig/errors.hpp"

using namespace toxtrig;
using nlohmann::json;

namespace {

std::string line(const std::string& id, const std::string& parent, const std::string& body,
                 std::int64_t t = 1620000000, const std::string& author = "alice", const std::string& link = "t3_p1") {
  return json{{"id", id}, {"parent_id", parent}, {"link_id", link},   {"author", author},
              {"body", body}, {"created_utc", t}, {"subreddit", "singapore"}}
      .dump();
}

Comment comment(const std::string& id, std::optional<std::string> parent, std::int64_t t = 1,
                const std::string& thread = "t3_p1") {
  Comment c;
  c.id = id;
  c.parent_id = std::move(parent);
  c.thread_id = thread;
  c.author = "a";
  c.body = "text " + id;
  c.created_at = t;
  c.community = "singapore";
  return c;
}

}  // namespace

TEST_CASE("parse_dump maps Reddit field names") {
  std::istringstream in(line("c1", "t3_p1", "hello there") + "\n" + line("c2", "t1_c1", "reply") + "\n");
  const auto r = parse_dump(in);
  REQUIRE(r.records.size() == 2);
  CHECK(r.malformed == 0);
  CHECK(r.records[0].id == "c1");
  CHECK_FALSE(r.records[0].parent_id.has_value());
  CHECK(r.records[0].thread_id == "t3_p1");
  CHECK(r.records[0].community == "singapore");
  CHECK(r.records[0].created_at == 1620000000);
  CHECK(r.records[1].parent_id == std::optional<std::string>("c1"));
}

TEST_CASE("parse_dump counts malformed lines and skips blanks") {
  json missing_body = json::parse(line("c3", "t3_p1", "x"));
  missing_body.erase("body");
  json bad_time = json::parse(line("c4", "t3_p1", "x"));
  bad_time["created_utc"] = 0;
  json string_time = json::parse(line("c5", "t3_p1", "x"));
  string_time["created_utc"] = "1620000000";
  std::istringstream in("{not json\n\n" + missing_body.dump() + "\n" + bad_time.dump() + "\n" + string_time.dump() +
                        "\n[1,2]\n");
  const auto r = parse_dump(in);
  CHECK(r.lines == 5);
  CHECK(r.malformed == 4);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].id == "c5");
}

TEST_CASE("parse_dump rejects an unreadable stream") {
  std::istringstream in;
  in.setstate(std::ios::badbit);
  CHECK_THROWS_AS(parse_dump(in), IoError);
}

TEST_CASE("clean removal reasons") {
  const CleaningConfig cfg;
  const auto reason = [&](const std::string& body, const std::string& author = "alice") {
    RawRecord r;
    r.id = "x";
    r.author = author;
    r.body = body;
    r.created_at = 1;
    return removal_reason(r, cfg);
  };
  CHECK(reason("[deleted]") == RemovalReason::Deleted);
  CHECK(reason(" [removed] ") == RemovalReason::Deleted);
  CHECK(reason("hello", "AutoModerator") == RemovalReason::BotOrModerator);
  CHECK(reason("hello", "automoderator") == RemovalReason::BotOrModerator);
  CHECK(reason("hello", "RemindMeBot") == RemovalReason::BotOrModerator);
  CHECK(reason("https://example.com/article?id=3") == RemovalReason::LinkOnly);
  CHECK(reason("  <https://a.com>  www.b.org ") == RemovalReason::LinkOnly);
  CHECK(reason("[https://a.com](https://a.com)") == RemovalReason::LinkOnly);
  CHECK(reason("https://i.redd.it/abc123.jpg") == RemovalReason::ImageOnly);
  CHECK(reason("![img](https://i.imgur.com/x.png)") == RemovalReason::ImageOnly);
  CHECK(reason("https://i.imgur.com/x.png https://news.com/a") == RemovalReason::LinkOnly);
  CHECK(reason("   ") == RemovalReason::Empty);
  CHECK(reason("!!! ??? &gt;") == RemovalReason::Empty);
  CHECK(reason("12345") == RemovalReason::Empty);
  CHECK_FALSE(reason("ordinary text comment").has_value());
  CHECK_FALSE(reason("see https://example.com for details").has_value());
  CHECK_FALSE(reason("[the article](https://example.com)").has_value());
  CHECK_FALSE(reason("I like robots", "roboticist").has_value());
}

TEST_CASE("clean keeps ordinary comments unchanged and conserves counts") {
  std::vector<RawRecord> records;
  for (const auto& [body, author] : std::vector<std::pair<std::string, std::string>>{
           {"ordinary text comment", "alice"},
           {"[deleted]", "bob"},
           {"hi", "AutoModerator"},
           {"https://x.com", "carol"},
           {"", "dan"}}) {
    RawRecord r;
    r.id = body + author;
    r.author = author;
    r.body = body;
    r.created_at = 5;
    records.push_back(r);
  }
  const auto out = clean(records);
  REQUIRE(out.comments.size() == 1);
  CHECK(static_cast<const CommentFields&>(out.comments[0]) == static_cast<const CommentFields&>(records[0]));
  CHECK(out.report.kept == 1);
  CHECK(out.report[RemovalReason::Deleted] == 1);
  CHECK(out.report[RemovalReason::BotOrModerator] == 1);
  CHECK(out.report[RemovalReason::LinkOnly] == 1);
  CHECK(out.report[RemovalReason::Empty] == 1);
  CHECK(out.report.input() == records.size());

  // Idempotent on the kept set.
  std::vector<RawRecord> again;
  for (const auto& c : out.comments) again.push_back(RawRecord{c});
  const auto twice = clean(again);
  CHECK(twice.comments.size() == out.comments.size());
  CHECK(twice.report.kept == again.size());
}

TEST_CASE("ingest folds malformed lines into the report") {
  std::istringstream in(line("c1", "t3_p1", "fine") + "\nbroken\n" + line("c2", "t3_p1", "[deleted]") + "\n");
  const auto out = ingest(in);
  CHECK(out.report.kept == 1);
  CHECK(out.report[RemovalReason::Malformed] == 1);
  CHECK(out.report[RemovalReason::Deleted] == 1);
  CHECK(out.report.input() == 3);
  const json j = out.report;
  CHECK(j["removed"]["malformed"] == 1);
  CHECK(j["input"] == 3);
}

TEST_CASE("build_threads: reply chain") {
  const auto threads = build_threads({comment("A", std::nullopt, 1), comment("B", "A", 2), comment("C", "B", 3)});
  REQUIRE(threads.size() == 1);
  const auto& t = threads[0];
  CHECK(t.root_id == "t3_p1");
  CHECK(t.depth() == 3);
  CHECK(t.top_level == std::vector<std::string>{"A"});
  CHECK(t.children_of("A") == std::vector<std::string>{"B"});
  CHECK(t.children_of("C").empty());
  CHECK(t.orphans.empty());
}

TEST_CASE("build_threads: missing parent is an orphan") {
  const auto threads = build_threads({comment("A", std::nullopt), comment("X", "gone")});
  REQUIRE(threads.size() == 1);
  CHECK(threads[0].orphans == std::set<std::string>{"X"});
  CHECK(threads[0].is_orphan("X"));
  CHECK(threads[0].members.size() == 2);
}

TEST_CASE("build_threads: children ordered by time then id; threads partitioned") {
  const auto threads = build_threads({comment("A", std::nullopt, 1), comment("c", "A", 5), comment("b", "A", 5),
                                      comment("a", "A", 9), comment("Z", std::nullopt, 1, "t3_p2")});
  REQUIRE(threads.size() == 2);
  CHECK(threads[0].children_of("A") == std::vector<std::string>{"b", "c", "a"});
  CHECK(threads[1].root_id == "t3_p2");
}

TEST_CASE("build_threads: duplicate id is fatal and named") {
  try {
    build_threads({comment("A", std::nullopt), comment("A", std::nullopt)});
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("A") != std::string::npos);
  }
}

TEST_CASE("build_threads: reply cycle is fatal") {
  CHECK_THROWS_AS(build_threads({comment("A", std::nullopt), comment("B", "C"), comment("C", "B")}), CorpusError);
}

TEST_CASE("build_threads is invariant under input permutation") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Comment> cs;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
      std::optional<std::string> parent;
      if (i > 0 && gen() % 4 != 0) parent = "c" + std::to_string(gen() % i);
      if (gen() % 17 == 0) parent = "missing" + std::to_string(i);
      cs.push_back(comment("c" + std::to_string(i), parent, static_cast<std::int64_t>(gen() % 5),
                           "t3_" + std::to_string(gen() % 3)));
    }
    // Threads must not split a parent from its child.
    for (auto& c : cs) {
      if (c.parent_id && c.parent_id->rfind("missing", 0) != 0) {
        const auto& p = *std::find_if(cs.begin(), cs.end(), [&](const Comment& x) { return x.id == *c.parent_id; });
        c.thread_id = p.thread_id;
      }
    }
    const std::string expected = json(build_threads(cs)).dump();
    for (int k = 0; k < 3; ++k) {
      std::shuffle(cs.begin(), cs.end(), gen);
      CHECK(json(build_threads(cs)).dump() == expected);
    }
    // Each member reached exactly once from the top-level comments and orphans.
    for (const auto& t : build_threads(cs)) {
      std::multiset<std::string> visited;
      std::vector<std::string> stack(t.top_level.begin(), t.top_level.end());
      stack.insert(stack.end(), t.orphans.begin(), t.orphans.end());
      while (!stack.empty()) {
        auto id = stack.back();
        stack.pop_back();
        visited.insert(id);
        for (const auto& ch : t.children_of(id)) stack.push_back(ch);
      }
      CHECK(visited.size() == t.members.size());
      for (const auto& m : t.members) CHECK(visited.count(m.id) == 1);
    }
  }
}

TEST_CASE("record_json round-trips through parse_record") {
  Comment top = comment("A", std::nullopt, 10);
  Comment reply = comment("B", "A", 11);
  for (const auto* c : {&top, &reply}) {
    auto back = parse_record(record_json(*c).dump());
    REQUIRE(back.has_value());
    CHECK(static_cast<const CommentFields&>(*back) == static_cast<const CommentFields&>(*c));
  }
}
