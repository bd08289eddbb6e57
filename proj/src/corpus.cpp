#include "toxtrig/corpus.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <regex>

#include <json.hpp>

#include "toxtrig/errors.hpp"
#include "toxtrig/text.hpp"

namespace toxtrig {

using nlohmann::json;

namespace {

std::string strip_prefix(std::string s, std::string_view prefix) {
  if (s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0) s.erase(0, prefix.size());
  return s;
}

std::optional<std::int64_t> as_timestamp(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return static_cast<std::int64_t>(v.get<double>());
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.empty() || s.size() > 18 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return std::nullopt;
    return std::stoll(s);
  }
  return std::nullopt;
}

bool ends_with_bot(std::string_view author) {
  if (author.size() < 3) return false;
  return ascii_lower(author.substr(author.size() - 3)) == "bot";
}

bool is_image_url(std::string_view url) {
  const std::string u = ascii_lower(url);
  static const std::regex kImage(R"(\.(png|jpe?g|gif|gifv|webp|bmp)(\?\S*)?$)");
  return std::regex_search(u, kImage) || u.find("i.redd.it/") != std::string::npos ||
         u.find("i.imgur.com/") != std::string::npos || u.find("preview.redd.it/") != std::string::npos;
}

// Classifies a body that holds no deletion marker: strips link and image markup and checks
// whether any word token remains.
std::optional<RemovalReason> content_reason(std::string_view body) {
  std::string rest(body);
  bool links = false;
  bool images = false;

  static const std::regex kMdImage(R"(!\[[^\]]*\]\(([^)\s]*)[^)]*\))");
  static const std::regex kMdLink(R"(\[([^\]]*)\]\(([^)\s]*)[^)]*\))");
  static const std::regex kUrl(R"((<)?(https?://|www\.)[^\s<>]+(>)?)", std::regex::icase);
  static const std::regex kEntity(R"(&(#x?[0-9a-fA-F]+|[a-zA-Z]+);)");

  const auto erase_matches = [&](const std::regex& re, auto&& on_match, bool keep_label) {
    std::string out;
    auto it = std::sregex_iterator(rest.begin(), rest.end(), re);
    std::size_t last = 0;
    for (; it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      out.append(rest, last, static_cast<std::size_t>(m.position()) - last);
      out.push_back(' ');
      if (keep_label) out += m[1].str();
      on_match(m);
      last = static_cast<std::size_t>(m.position() + m.length());
    }
    out.append(rest, last, std::string::npos);
    rest = std::move(out);
  };

  erase_matches(kMdImage, [&](const std::smatch&) { images = true; }, false);
  erase_matches(kMdLink, [&](const std::smatch& m) { (is_image_url(m[2].str()) ? images : links) = true; }, true);
  erase_matches(kUrl, [&](const std::smatch& m) { (is_image_url(m[0].str()) ? images : links) = true; }, false);
  rest = std::regex_replace(rest, kEntity, " ");

  if (!tokenize(rest).empty()) return std::nullopt;
  if (links) return RemovalReason::LinkOnly;
  if (images) return RemovalReason::ImageOnly;
  return RemovalReason::Empty;
}

bool by_time_then_id(const Comment* a, const Comment* b) {
  return std::tie(a->created_at, a->id) < std::tie(b->created_at, b->id);
}

}  // namespace

std::optional<RawRecord> parse_record(std::string_view line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;

  const auto str = [&](const char* key) -> const std::string* {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return nullptr;
    return &it->get_ref<const std::string&>();
  };
  const std::string* id = str("id");
  const std::string* link = str("link_id");
  const std::string* author = str("author");
  const std::string* body = str("body");
  const std::string* community = str("subreddit");
  auto created = j.find("created_utc");
  if (!id || !link || !author || !body || !community || created == j.end()) return std::nullopt;
  if (id->empty() || link->empty()) return std::nullopt;
  const auto ts = as_timestamp(*created);
  if (!ts || *ts <= 0) return std::nullopt;

  RawRecord r;
  r.id = *id;
  r.thread_id = *link;
  r.author = *author;
  r.body = *body;
  r.created_at = *ts;
  r.community = *community;

  auto parent = j.find("parent_id");
  if (parent != j.end() && !parent->is_null()) {
    if (!parent->is_string()) return std::nullopt;
    const auto& p = parent->get_ref<const std::string&>();
    const bool submission = p.rfind("t3_", 0) == 0 || p == r.thread_id ||
                            strip_prefix(r.thread_id, "t3_") == p;
    if (!p.empty() && !submission) r.parent_id = strip_prefix(p, "t1_");
  }
  return r;
}

ParseResult parse_dump(std::istream& in) {
  if (!in) throw IoError("unreadable input stream");
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++result.lines;
    if (auto r = parse_record(line)) {
      result.records.push_back(std::move(*r));
    } else {
      ++result.malformed;
    }
  }
  if (in.bad()) throw IoError("read error while parsing dump");
  return result;
}

std::string_view to_string(RemovalReason r) {
  switch (r) {
    case RemovalReason::Deleted: return "deleted";
    case RemovalReason::BotOrModerator: return "bot_or_moderator";
    case RemovalReason::LinkOnly: return "link_only";
    case RemovalReason::ImageOnly: return "image_only";
    case RemovalReason::Empty: return "empty";
    case RemovalReason::Malformed: return "malformed";
  }
  return "unknown";
}

std::size_t CleaningReport::removed_total() const {
  return std::accumulate(removed.begin(), removed.end(), std::size_t{0});
}

void to_json(json& j, const CleaningReport& report) {
  json removed = json::object();
  for (std::size_t i = 0; i < kRemovalReasonCount; ++i) {
    removed[std::string(to_string(static_cast<RemovalReason>(i)))] = report.removed[i];
  }
  j = json{{"input", report.input()}, {"kept", report.kept}, {"removed", removed}};
}

std::optional<RemovalReason> removal_reason(const CommentFields& record, const CleaningConfig& config) {
  const std::string_view body = trim(record.body);
  if (body == "[deleted]" || body == "[removed]") return RemovalReason::Deleted;

  const std::string author = ascii_lower(record.author);
  const bool denied = std::any_of(config.author_denylist.begin(), config.author_denylist.end(),
                                  [&](const std::string& a) { return ascii_lower(a) == author; });
  if (denied || (config.bot_suffix && ends_with_bot(record.author))) return RemovalReason::BotOrModerator;

  if (body.empty()) return RemovalReason::Empty;
  return content_reason(body);
}

CleanResult clean(const std::vector<RawRecord>& records, const CleaningConfig& config) {
  CleanResult out;
  for (const auto& r : records) {
    if (auto reason = removal_reason(r, config)) {
      ++out.report[*reason];
    } else {
      out.comments.push_back(Comment{r});
      ++out.report.kept;
    }
  }
  return out;
}

CleanResult ingest(std::istream& in, const CleaningConfig& config) {
  ParseResult parsed = parse_dump(in);
  CleanResult out = clean(parsed.records, config);
  out.report[RemovalReason::Malformed] += parsed.malformed;
  return out;
}

const Comment* CommentThread::find(std::string_view id) const {
  auto it = std::lower_bound(members.begin(), members.end(), id,
                             [](const Comment& c, std::string_view key) { return c.id < key; });
  return it != members.end() && it->id == id ? &*it : nullptr;
}

const std::vector<std::string>& CommentThread::children_of(std::string_view id) const {
  static const std::vector<std::string> kNone;
  auto it = children.find(std::string(id));
  return it == children.end() ? kNone : it->second;
}

std::size_t CommentThread::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<const std::string*, std::size_t>> stack;
  for (const auto& id : top_level) stack.emplace_back(&id, 1);
  for (const auto& id : orphans) stack.emplace_back(&id, 1);
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    for (const auto& child : children_of(*id)) stack.emplace_back(&child, d + 1);
  }
  return best;
}

std::vector<CommentThread> build_threads(std::vector<Comment> comments) {
  std::sort(comments.begin(), comments.end(), [](const Comment& a, const Comment& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < comments.size(); ++i) {
    if (comments[i].id == comments[i - 1].id) throw CorpusError("duplicate comment id: " + comments[i].id);
  }

  std::map<std::string, std::vector<Comment>> by_thread;
  for (auto& c : comments) by_thread[c.thread_id].push_back(std::move(c));

  std::vector<CommentThread> threads;
  threads.reserve(by_thread.size());
  for (auto& [thread_id, members] : by_thread) {
    CommentThread t;
    t.root_id = thread_id;
    t.members = std::move(members);

    std::map<std::string, std::vector<const Comment*>> kids;
    std::vector<const Comment*> tops;
    for (const auto& c : t.members) {
      if (!c.parent_id) {
        tops.push_back(&c);
      } else if (!t.find(*c.parent_id)) {
        t.orphans.insert(c.id);
      } else {
        kids[*c.parent_id].push_back(&c);
      }
    }
    std::sort(tops.begin(), tops.end(), by_time_then_id);
    for (const auto* c : tops) t.top_level.push_back(c->id);
    for (auto& [parent, list] : kids) {
      std::sort(list.begin(), list.end(), by_time_then_id);
      auto& ids = t.children[parent];
      for (const auto* c : list) ids.push_back(c->id);
    }

    // Every member must be reachable from a top-level comment or an orphan; the rest sit on a cycle.
    std::set<std::string> seen;
    std::vector<std::string> stack(t.top_level.begin(), t.top_level.end());
    stack.insert(stack.end(), t.orphans.begin(), t.orphans.end());
    while (!stack.empty()) {
      std::string id = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(id).second) continue;
      for (const auto& child : t.children_of(id)) stack.push_back(child);
    }
    if (seen.size() != t.members.size()) {
      for (const auto& c : t.members) {
        if (!seen.count(c.id)) throw CorpusError("reply cycle through comment id: " + c.id);
      }
    }
    threads.push_back(std::move(t));
  }
  return threads;
}

void to_json(json& j, const CommentThread& t) {
  json members = json::array();
  for (const auto& c : t.members) members.push_back(c.id);
  json children = json::object();
  for (const auto& [parent, ids] : t.children) children[parent] = ids;
  j = json{{"root_id", t.root_id},
           {"members", members},
           {"top_level", t.top_level},
           {"children", children},
           {"orphans", t.orphans},
           {"depth", t.depth()}};
}

json record_json(const CommentFields& c) {
  json j;
  j["id"] = c.id;
  j["parent_id"] = c.parent_id ? "t1_" + *c.parent_id : c.thread_id;
  j["link_id"] = c.thread_id;
  j["author"] = c.author;
  j["body"] = c.body;
  j["created_utc"] = c.created_at;
  j["subreddit"] = c.community;
  return j;
}

}  // namespace toxtrig
