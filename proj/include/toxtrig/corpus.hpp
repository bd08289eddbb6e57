#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace toxtrig {

struct CommentFields {
  std::string id;
  /// Comment id of the parent; empty for top-level comments (replies to the submission).
  std::optional<std::string> parent_id;
  std::string thread_id;
  std::string author;
  std::string body;
  std::int64_t created_at = 0;
  std::string community;

  friend bool operator==(const CommentFields&, const CommentFields&) = default;
};

/// One parsed dump line.
struct RawRecord : CommentFields {};

/// A record that survived cleaning: body carries at least one word token.
struct Comment : CommentFields {};

struct ParseResult {
  std::vector<RawRecord> records;
  std::size_t malformed = 0;
  std::size_t lines = 0;  // non-blank lines seen
};

/// Maps one dump line (Reddit dump field names) to a record; nullopt if malformed.
std::optional<RawRecord> parse_record(std::string_view line);

/// Reads NDJSON. Blank lines are ignored; bad lines are counted, not fatal.
ParseResult parse_dump(std::istream& in);

enum class RemovalReason : std::size_t { Deleted, BotOrModerator, LinkOnly, ImageOnly, Empty, Malformed };
inline constexpr std::size_t kRemovalReasonCount = 6;
std::string_view to_string(RemovalReason r);

struct CleaningConfig {
  /// Case-insensitive author names to drop.
  std::vector<std::string> author_denylist{"AutoModerator"};
  /// Also drop authors whose name ends in "bot" (case-insensitive).
  bool bot_suffix = true;
};

struct CleaningReport {
  std::array<std::size_t, kRemovalReasonCount> removed{};
  std::size_t kept = 0;

  std::size_t removed_total() const;
  std::size_t input() const { return kept + removed_total(); }
  std::size_t& operator[](RemovalReason r) { return removed[static_cast<std::size_t>(r)]; }
  std::size_t operator[](RemovalReason r) const { return removed[static_cast<std::size_t>(r)]; }
};

void to_json(nlohmann::json& j, const CleaningReport& report);

/// Why a record would be removed, or nullopt if it is kept.
std::optional<RemovalReason> removal_reason(const CommentFields& record, const CleaningConfig& config);

struct CleanResult {
  std::vector<Comment> comments;
  CleaningReport report;
};

/// Total: every record is either kept unchanged or counted under one removal reason.
CleanResult clean(const std::vector<RawRecord>& records, const CleaningConfig& config = {});

/// parse_dump + clean, with malformed lines folded into the report.
CleanResult ingest(std::istream& in, const CleaningConfig& config = {});

struct CommentThread {
  std::string root_id;
  /// Sorted by id.
  std::vector<Comment> members;
  /// Parent id -> children ordered by (created_at, id). Only parents with replies appear.
  std::map<std::string, std::vector<std::string>> children;
  /// Members without a parent, ordered by (created_at, id).
  std::vector<std::string> top_level;
  /// Members whose parent is not in the thread.
  std::set<std::string> orphans;

  const Comment* find(std::string_view id) const;
  const std::vector<std::string>& children_of(std::string_view id) const;
  bool is_orphan(std::string_view id) const { return orphans.count(std::string(id)) != 0; }
  /// Longest root-to-leaf path, counted in comments.
  std::size_t depth() const;
};

/// Partitions comments by thread id. Output is independent of input order.
/// Throws CorpusError on duplicate ids or reply cycles.
std::vector<CommentThread> build_threads(std::vector<Comment> comments);

void to_json(nlohmann::json& j, const CommentThread& thread);

/// Record as a dump line with the original field names.
nlohmann::json record_json(const CommentFields& c);

}  // namespace toxtrig
