#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <json.hpp>

#include "toxtrig/text.hpp"
#include "toxtrig/triggers.hpp"

namespace toxtrig {

inline constexpr std::string_view kPipelineVersion = "1.0";

struct Hyperparams {
  double learning_rate = 1.0;
  double l2 = 1e-3;
  int epochs = 500;
  /// Recorded for provenance; training starts from zero weights and is deterministic.
  std::uint64_t seed = 0;
  /// 1 = unigrams, 2 = unigrams + bigrams.
  int max_ngram = 2;
  /// Minimum training occurrences for an n-gram to enter the vocabulary.
  std::size_t min_feature_count = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const Hyperparams& h);
void from_json(const nlohmann::json& j, Hyperparams& h);

/// Unigrams, then bigrams ("a b") over adjacent tokens when max_ngram >= 2.
std::vector<std::string> ngram_terms(std::span<const std::string> tokens, int max_ngram);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Indices follow lexicographic term order.
  explicit Vocabulary(std::map<std::string, int> index);

  static Vocabulary build(std::span<const std::vector<std::string>> documents, int max_ngram,
                          std::size_t min_count = 1);

  std::optional<int> index(std::string_view term) const;
  int size() const { return static_cast<int>(terms_.size()); }
  const std::string& term(int i) const { return terms_[static_cast<std::size_t>(i)]; }
  const std::map<std::string, int, std::less<>>& map() const { return index_; }

 private:
  std::map<std::string, int, std::less<>> index_;
  std::vector<std::string> terms_;
};

/// Sparse n-gram counts; out-of-vocabulary n-grams are dropped.
using FeatureVector = Eigen::SparseVector<double>;
using DesignMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

FeatureVector featurize(std::span<const std::string> tokens, const Vocabulary& vocab, int max_ngram);
FeatureVector featurize(std::string_view text, const Vocabulary& vocab, const TokenizerConfig& tokenizer,
                        int max_ngram);

DesignMatrix design_matrix(std::span<const FeatureVector> rows, int cols);

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// Trigger-prediction model interface. `logit` sees a comment already split into tokens so the
/// attribution code can remove tokens before featurization.
class TriggerClassifier {
 public:
  virtual ~TriggerClassifier() = default;
  virtual double logit(std::span<const std::string> tokens) const = 0;
  virtual const TokenizerConfig& tokenizer() const = 0;
  virtual nlohmann::json to_json() const = 0;

  double probability(std::span<const std::string> tokens) const { return sigmoid(logit(tokens)); }
  /// Probability that `text` is a trigger.
  double predict(std::string_view text) const;
};

/// L2-regularized logistic regression over unigram and bigram counts.
class LogisticModel final : public TriggerClassifier {
 public:
  LogisticModel(Vocabulary vocab, Eigen::VectorXd weights, double bias, Hyperparams hyperparams,
                TokenizerConfig tokenizer = {});

  double logit(std::span<const std::string> tokens) const override;
  double logit(const FeatureVector& x) const { return bias_ + x.dot(weights_); }
  const TokenizerConfig& tokenizer() const override { return tokenizer_; }
  nlohmann::json to_json() const override;
  static LogisticModel from_json(const nlohmann::json& j);

  const Vocabulary& vocabulary() const { return vocab_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }
  const Hyperparams& hyperparams() const { return hyperparams_; }
  /// Weight of an n-gram, 0 if out of vocabulary.
  double weight(std::string_view term) const;

 private:
  Vocabulary vocab_;
  Eigen::VectorXd weights_;
  double bias_;
  Hyperparams hyperparams_;
  TokenizerConfig tokenizer_;
};

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd grad_weights;
  double grad_bias = 0.0;
};

/// Mean logistic loss over rows of X plus (l2 / 2) * |w|^2; the bias is not penalized.
LossGradient loss_and_gradient(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                               double bias, double l2);

struct TrainResult {
  LogisticModel model;
  /// Loss before training followed by the loss after each epoch; non-increasing.
  std::vector<double> loss_history;
};

/// Full-batch gradient descent from zero weights. A step that raises the loss is rejected and the
/// learning rate halved. Throws DataError on a non-finite loss.
TrainResult train(std::span<const TriggerExample> examples, const Hyperparams& hyperparams,
                  const TokenizerConfig& tokenizer = {});
TrainResult train(const DatasetSplit& split, const Hyperparams& hyperparams, const TokenizerConfig& tokenizer = {});

struct EvalReport {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::size_t true_positive = 0, false_positive = 0, true_negative = 0, false_negative = 0;

  std::size_t size() const { return true_positive + false_positive + true_negative + false_negative; }
  static EvalReport from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
};

void to_json(nlohmann::json& j, const EvalReport& r);

/// Trigger is the positive class; probability >= threshold predicts Trigger.
EvalReport evaluate(const TriggerClassifier& model, std::span<const TriggerExample> test, double threshold = 0.5);

}  // namespace toxtrig
