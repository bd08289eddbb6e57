#include "toxtrig/compare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "toxtrig/errors.hpp"
#include "toxtrig/io.hpp"

namespace toxtrig {

using nlohmann::json;

void TriggerRanking::validate() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& t : terms) {
    if (!seen.insert(t).second) throw DataError("ranking for " + community + " repeats term " + t);
  }
}

namespace {

std::optional<double> spearman(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string_view, std::size_t> rank_b;
  for (std::size_t i = 0; i < b.size(); ++i) rank_b.emplace(b[i], i);
  // Shared terms in A's order, re-ranked 0..n-1 within each list.
  std::vector<std::size_t> pos_b;
  for (const auto& t : a) {
    if (auto it = rank_b.find(t); it != rank_b.end()) pos_b.push_back(it->second);
  }
  const std::size_t n = pos_b.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pos_b[x] < pos_b[y]; });
  double d2 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double d = static_cast<double>(order[r]) - static_cast<double>(r);
    d2 += d * d;
  }
  const auto nd = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nd * (nd * nd - 1.0));
}

}  // namespace

OverlapReport overlap_at_k(const TriggerRanking& a, const TriggerRanking& b, std::span<const std::size_t> ks) {
  if (a.terms.empty() || b.terms.empty()) throw DataError("cannot compare an empty ranking");
  a.validate();
  b.validate();
  OverlapReport out{a.community, b.community, {}};
  const std::size_t limit = std::min(a.terms.size(), b.terms.size());
  for (std::size_t requested : ks) {
    if (requested == 0) throw DataError("overlap k must be positive");
    OverlapEntry e;
    e.k_requested = requested;
    e.k = std::min(requested, limit);
    e.truncated = e.k != requested;
    const std::vector<std::string> top_a(a.terms.begin(), a.terms.begin() + static_cast<std::ptrdiff_t>(e.k));
    const std::vector<std::string> top_b(b.terms.begin(), b.terms.begin() + static_cast<std::ptrdiff_t>(e.k));
    const std::unordered_set<std::string_view> set_b(top_b.begin(), top_b.end());
    const auto shared = std::count_if(top_a.begin(), top_a.end(), [&](const std::string& t) { return set_b.count(t) != 0; });
    e.overlap = static_cast<double>(shared) / static_cast<double>(e.k);
    e.rank_correlation = spearman(top_a, top_b);
    out.entries.push_back(e);
  }
  return out;
}

void to_json(json& j, const OverlapReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"k_requested", e.k_requested},
                       {"k", e.k},
                       {"overlap", e.overlap},
                       {"rank_correlation", e.rank_correlation ? json(*e.rank_correlation) : json(nullptr)},
                       {"truncated", e.truncated}});
  }
  j = json{{"a", r.community_a}, {"b", r.community_b}, {"entries", entries}};
}

json comparison_report(std::span<const TriggerRanking> rankings, std::span<const std::size_t> ks,
                       const json& metadata, std::size_t ranking_preview) {
  json communities = json::array();
  for (const auto& r : rankings) {
    r.validate();
    const auto n = std::min(ranking_preview, r.terms.size());
    communities.push_back({{"community", r.community},
                           {"size", r.terms.size()},
                           {"top_terms", std::vector<std::string>(r.terms.begin(), r.terms.begin() + static_cast<std::ptrdiff_t>(n))}});
  }
  json report{{"metadata", metadata}, {"k", std::vector<std::size_t>(ks.begin(), ks.end())}, {"communities", communities}};
  if (rankings.size() < 2) {
    report["overlap"] = nullptr;
  } else {
    json pairs = json::array();
    for (std::size_t i = 0; i < rankings.size(); ++i) {
      for (std::size_t j = i + 1; j < rankings.size(); ++j) pairs.push_back(overlap_at_k(rankings[i], rankings[j], ks));
    }
    report["overlap"] = pairs;
  }
  return report;
}

std::string comparison_markdown(const json& report) {
  std::ostringstream md;
  md << "# Trigger comparison\n\n";
  for (const auto& c : report.at("communities")) {
    md << "## " << c.at("community").get<std::string>() << "\n\n"
       << c.at("size").get<std::size_t>() << " ranked terms. Top terms:";
    for (const auto& t : c.at("top_terms")) md << ' ' << t.get<std::string>();
    md << "\n\n";
  }
  md << "## Overlap\n\n";
  if (report.at("overlap").is_null()) {
    md << "Not computed: fewer than two communities.\n";
    return md.str();
  }
  for (const auto& pair : report.at("overlap")) {
    md << "### " << pair.at("a").get<std::string>() << " vs " << pair.at("b").get<std::string>() << "\n\n"
       << "| k | overlap | rank correlation |\n|---|---|---|\n";
    for (const auto& e : pair.at("entries")) {
      md << "| " << e.at("k").get<std::size_t>();
      if (e.at("truncated").get<bool>()) md << " (requested " << e.at("k_requested").get<std::size_t>() << ")";
      md << " | " << format_double(e.at("overlap").get<double>()) << " | ";
      md << (e.at("rank_correlation").is_null() ? std::string("n/a") : format_double(e.at("rank_correlation").get<double>()));
      md << " |\n";
    }
    md << '\n';
  }
  return md.str();
}

void write_comparison_report(const json& report, const std::filesystem::path& base) {
  std::filesystem::path json_path = base;
  json_path += ".json";
  std::filesystem::path md_path = base;
  md_path += ".md";
  write_file_atomic(json_path, report.dump(2) + "\n");
  write_file_atomic(md_path, comparison_markdown(report));
}

}  // namespace toxtrig
