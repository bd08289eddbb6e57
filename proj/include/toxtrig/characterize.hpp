#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "toxtrig/errors.hpp"
#include "toxtrig/text.hpp"
#include "toxtrig/toxicity.hpp"

namespace toxtrig {

struct TermStats {
  std::string term;
  std::uint64_t count_toxic = 0;
  std::uint64_t count_nontoxic = 0;
};

/// Per-term counts plus the category token totals they are normalized by.
/// Totals count every token in the category, including terms dropped by min_count.
struct TermTable {
  std::vector<TermStats> terms;  // sorted by term
  std::uint64_t total_toxic = 0;
  std::uint64_t total_nontoxic = 0;
};

struct LabeledText {
  std::string_view text;
  ToxicityLabel label;
};

/// Token counts over Toxic and NonToxic texts; Ambiguous and Other texts are skipped.
/// Terms with fewer than `min_count` occurrences overall are dropped.
TermTable term_stats(std::span<const LabeledText> corpus, const TokenizerConfig& tokenizer = {},
                     std::uint64_t min_count = 5);

namespace detail {

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> standardize(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& x) {
  const Scalar mean = x.mean();
  const Scalar sd = std::sqrt((x - mean).square().mean());
  if (!(sd > Scalar(0))) return Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(x.size());
  return (x - mean) / sd;
}

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> normal_cdf(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& z) {
  return z.unaryExpr([](Scalar v) { return Scalar(0.5) * std::erfc(-v / std::sqrt(Scalar(2))); });
}

// F score of one category: harmonic mean of the normal-CDF-mapped, standardized precision and
// log-dampened frequency.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> category_f(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& own,
                                                   const Eigen::Array<Scalar, Eigen::Dynamic, 1>& other,
                                                   Scalar own_total) {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Array both = own + other;
  const Array precision = (both > Scalar(0)).select(own / both, Scalar(0));
  const Array frequency = (own / own_total).log1p();
  const Array a = normal_cdf<Scalar>(standardize<Scalar>(precision));
  const Array b = normal_cdf<Scalar>(standardize<Scalar>(frequency));
  const Array sum = a + b;
  return (sum > Scalar(0)).select(Scalar(2) * a * b / sum, Scalar(0));
}

}  // namespace detail

/// Scaled F-score per term, in [-1, 1]; positive means toxic-associated.
///
/// For each category c: precision_c = n_c / (n_c + n_other), frequency_c = log(1 + n_c / N_c).
/// Both are z-standardized across the vocabulary (population deviation; zero spread maps to 0),
/// passed through the standard normal CDF and combined by harmonic mean into F_c.
/// The score is F_toxic - F_nontoxic.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> scaled_f_scores(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& n_toxic,
                                                        const Eigen::Array<Scalar, Eigen::Dynamic, 1>& n_nontoxic,
                                                        Scalar total_toxic, Scalar total_nontoxic) {
  if (n_toxic.size() != n_nontoxic.size()) throw DataError("count vectors differ in length");
  if (n_toxic.size() < 2) throw DataError("degenerate corpus: need at least 2 terms");
  if (!(total_toxic > Scalar(0)) || !(total_nontoxic > Scalar(0))) {
    throw DataError("degenerate corpus: a category has no tokens");
  }
  return detail::category_f<Scalar>(n_toxic, n_nontoxic, total_toxic) -
         detail::category_f<Scalar>(n_nontoxic, n_toxic, total_nontoxic);
}

std::map<std::string, double> scaled_f_score(const TermTable& table);

struct ScoredTerm {
  TermStats stats;
  double score = 0.0;
};

/// Terms joined with their scores, sorted by score descending then term.
std::vector<ScoredTerm> rank_terms(const TermTable& table);

/// Columns term,count_toxic,count_nontoxic,scaled_f_score.
std::string scaled_f_csv(std::span<const ScoredTerm> ranked);

}  // namespace toxtrig
