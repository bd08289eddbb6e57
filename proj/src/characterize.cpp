#include "toxtrig/characterize.hpp"

#include <algorithm>
#include <unordered_map>

#include "toxtrig/io.hpp"

namespace toxtrig {

TermTable term_stats(std::span<const LabeledText> corpus, const TokenizerConfig& tokenizer,
                     std::uint64_t min_count) {
  std::unordered_map<std::string, std::pair<std::uint64_t, std::uint64_t>> counts;
  TermTable table;
  for (const auto& doc : corpus) {
    const bool toxic = doc.label == ToxicityLabel::Toxic;
    if (!toxic && doc.label != ToxicityLabel::NonToxic) continue;
    for (auto& tok : tokenize(doc.text, tokenizer)) {
      auto& c = counts[std::move(tok)];
      if (toxic) {
        ++c.first;
        ++table.total_toxic;
      } else {
        ++c.second;
        ++table.total_nontoxic;
      }
    }
  }
  for (auto& [term, c] : counts) {
    if (c.first + c.second >= min_count) table.terms.push_back({term, c.first, c.second});
  }
  std::sort(table.terms.begin(), table.terms.end(),
            [](const TermStats& a, const TermStats& b) { return a.term < b.term; });
  return table;
}

namespace {

Eigen::ArrayXd scores_for(const TermTable& table) {
  const auto n = static_cast<Eigen::Index>(table.terms.size());
  Eigen::ArrayXd toxic(n), nontoxic(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    toxic(i) = static_cast<double>(table.terms[i].count_toxic);
    nontoxic(i) = static_cast<double>(table.terms[i].count_nontoxic);
  }
  return scaled_f_scores<double>(toxic, nontoxic, static_cast<double>(table.total_toxic),
                                 static_cast<double>(table.total_nontoxic));
}

}  // namespace

std::map<std::string, double> scaled_f_score(const TermTable& table) {
  const Eigen::ArrayXd s = scores_for(table);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < table.terms.size(); ++i) out[table.terms[i].term] = s(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<ScoredTerm> rank_terms(const TermTable& table) {
  const Eigen::ArrayXd s = scores_for(table);
  std::vector<ScoredTerm> out;
  out.reserve(table.terms.size());
  for (std::size_t i = 0; i < table.terms.size(); ++i) out.push_back({table.terms[i], s(static_cast<Eigen::Index>(i))});
  std::sort(out.begin(), out.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.stats.term < b.stats.term;
  });
  return out;
}

std::string scaled_f_csv(std::span<const ScoredTerm> ranked) {
  std::string out = "term,count_toxic,count_nontoxic,scaled_f_score\n";
  for (const auto& r : ranked) {
    out += csv_row({r.stats.term, std::to_string(r.stats.count_toxic), std::to_string(r.stats.count_nontoxic),
                    format_double(r.score)});
  }
  return out;
}

}  // namespace toxtrig
