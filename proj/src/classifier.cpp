#include "toxtrig/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "toxtrig/errors.hpp"

namespace toxtrig {

using nlohmann::json;

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("classifier.learning_rate", "must be positive and finite");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("classifier.l2", "must be non-negative and finite");
  if (epochs < 0) throw ConfigError("classifier.epochs", "must be >= 0");
  if (max_ngram < 1 || max_ngram > 2) throw ConfigError("classifier.max_ngram", "must be 1 or 2");
  if (min_feature_count < 1) throw ConfigError("classifier.min_feature_count", "must be >= 1");
}

void to_json(json& j, const Hyperparams& h) {
  j = json{{"learning_rate", h.learning_rate}, {"l2", h.l2},
           {"epochs", h.epochs},               {"seed", h.seed},
           {"max_ngram", h.max_ngram},         {"min_feature_count", h.min_feature_count}};
}

void from_json(const json& j, Hyperparams& h) {
  h.learning_rate = j.at("learning_rate").get<double>();
  h.l2 = j.at("l2").get<double>();
  h.epochs = j.at("epochs").get<int>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.max_ngram = j.at("max_ngram").get<int>();
  h.min_feature_count = j.at("min_feature_count").get<std::size_t>();
}

std::vector<std::string> ngram_terms(std::span<const std::string> tokens, int max_ngram) {
  std::vector<std::string> out(tokens.begin(), tokens.end());
  if (max_ngram >= 2) {
    for (std::size_t i = 1; i < tokens.size(); ++i) out.push_back(tokens[i - 1] + ' ' + tokens[i]);
  }
  return out;
}

Vocabulary::Vocabulary(std::map<std::string, int> index) {
  terms_.resize(index.size());
  for (auto& [term, i] : index) {
    if (i < 0 || static_cast<std::size_t>(i) >= terms_.size() || !terms_[static_cast<std::size_t>(i)].empty()) {
      throw DataError("vocabulary indices must be a permutation of 0..n-1");
    }
    terms_[static_cast<std::size_t>(i)] = term;
    index_.emplace(term, i);
  }
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> documents, int max_ngram,
                             std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (auto& term : ngram_terms(doc, max_ngram)) ++counts[std::move(term)];
  }
  std::map<std::string, int> index;
  int next = 0;
  for (const auto& [term, c] : counts) {
    if (c >= min_count) index.emplace(term, next++);
  }
  return Vocabulary(std::move(index));
}

std::optional<int> Vocabulary::index(std::string_view term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureVector featurize(std::span<const std::string> tokens, const Vocabulary& vocab, int max_ngram) {
  FeatureVector x(vocab.size());
  std::map<int, double> counts;
  for (const auto& term : ngram_terms(tokens, max_ngram)) {
    if (auto i = vocab.index(term)) counts[*i] += 1.0;
  }
  x.reserve(static_cast<Eigen::Index>(counts.size()));
  for (const auto& [i, c] : counts) x.insertBack(i) = c;
  return x;
}

FeatureVector featurize(std::string_view text, const Vocabulary& vocab, const TokenizerConfig& tokenizer,
                        int max_ngram) {
  return featurize(tokenize(text, tokenizer), vocab, max_ngram);
}

DesignMatrix design_matrix(std::span<const FeatureVector> rows, int cols) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (FeatureVector::InnerIterator it(rows[r]); it; ++it) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
    }
  }
  DesignMatrix X(static_cast<Eigen::Index>(rows.size()), cols);
  X.setFromTriplets(triplets.begin(), triplets.end());
  return X;
}

double TriggerClassifier::predict(std::string_view text) const { return probability(tokenize(text, tokenizer())); }

LogisticModel::LogisticModel(Vocabulary vocab, Eigen::VectorXd weights, double bias, Hyperparams hyperparams,
                             TokenizerConfig tokenizer)
    : vocab_(std::move(vocab)),
      weights_(std::move(weights)),
      bias_(bias),
      hyperparams_(hyperparams),
      tokenizer_(tokenizer) {
  if (weights_.size() != vocab_.size()) throw DataError("model has a weight count different from its vocabulary");
  if (!weights_.allFinite() || !std::isfinite(bias_)) throw DataError("model parameters must be finite");
}

double LogisticModel::logit(std::span<const std::string> tokens) const {
  return logit(featurize(tokens, vocab_, hyperparams_.max_ngram));
}

double LogisticModel::weight(std::string_view term) const {
  auto i = vocab_.index(term);
  return i ? weights_(*i) : 0.0;
}

json LogisticModel::to_json() const {
  json vocab = json::object();
  for (const auto& [term, i] : vocab_.map()) vocab[term] = i;
  return json{{"kind", "logistic_ngram"},
              {"pipeline_version", kPipelineVersion},
              {"vocabulary", vocab},
              {"weights", std::vector<double>(weights_.data(), weights_.data() + weights_.size())},
              {"bias", bias_},
              {"hyperparams", hyperparams_},
              {"tokenizer", {{"lowercase", tokenizer_.lowercase}, {"drop_numeric", tokenizer_.drop_numeric}}}};
}

LogisticModel LogisticModel::from_json(const json& j) {
  try {
    if (j.at("kind") != "logistic_ngram") throw DataError("unsupported model kind");
    std::map<std::string, int> index;
    for (const auto& [term, i] : j.at("vocabulary").items()) index.emplace(term, i.get<int>());
    const auto w = j.at("weights").get<std::vector<double>>();
    TokenizerConfig tok;
    tok.lowercase = j.at("tokenizer").at("lowercase").get<bool>();
    tok.drop_numeric = j.at("tokenizer").at("drop_numeric").get<bool>();
    return LogisticModel(Vocabulary(std::move(index)), Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                         j.at("bias").get<double>(), j.at("hyperparams").get<Hyperparams>(), tok);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

LossGradient loss_and_gradient(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                               double bias, double l2) {
  const auto n = static_cast<double>(X.rows());
  const Eigen::VectorXd z = (X * w).array() + bias;
  Eigen::VectorXd residual(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z(i)) - y(i) * z(i);
    residual(i) = sigmoid(z(i)) - y(i);
  }
  LossGradient out;
  out.loss = loss / n + 0.5 * l2 * w.squaredNorm();
  out.grad_weights = (X.transpose() * residual) / n + l2 * w;
  out.grad_bias = residual.sum() / n;
  return out;
}

TrainResult train(std::span<const TriggerExample> examples, const Hyperparams& hp, const TokenizerConfig& tokenizer) {
  hp.validate();
  std::size_t positives = 0;
  for (const auto& e : examples) positives += e.label == TriggerLabel::Trigger;
  if (positives < 2 || examples.size() - positives < 2) throw DataError("training needs at least 2 examples per class");

  std::vector<std::vector<std::string>> docs;
  docs.reserve(examples.size());
  for (const auto& e : examples) docs.push_back(tokenize(e.text, tokenizer));
  Vocabulary vocab = Vocabulary::build(docs, hp.max_ngram, hp.min_feature_count);

  std::vector<FeatureVector> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(featurize(d, vocab, hp.max_ngram));
  const DesignMatrix X = design_matrix(rows, vocab.size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = examples[i].label == TriggerLabel::Trigger ? 1.0 : 0.0;
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(vocab.size());
  double b = 0.0;
  LossGradient current = loss_and_gradient(X, y, w, b, hp.l2);
  std::vector<double> history{current.loss};
  double lr = hp.learning_rate;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    const Eigen::VectorXd w_next = w - lr * current.grad_weights;
    const double b_next = b - lr * current.grad_bias;
    LossGradient next = loss_and_gradient(X, y, w_next, b_next, hp.l2);
    if (!std::isfinite(next.loss) || !w_next.allFinite()) {
      throw DataError("training diverged (non-finite loss at epoch " + std::to_string(epoch) +
                      "); use a smaller learning rate");
    }
    if (next.loss <= current.loss) {
      w = w_next;
      b = b_next;
      current = std::move(next);
    } else {
      lr *= 0.5;
    }
    history.push_back(current.loss);
  }
  return TrainResult{LogisticModel(std::move(vocab), std::move(w), b, hp, tokenizer), std::move(history)};
}

TrainResult train(const DatasetSplit& split, const Hyperparams& hp, const TokenizerConfig& tokenizer) {
  return train(split.train, hp, tokenizer);
}

EvalReport EvalReport::from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  EvalReport r;
  r.true_positive = tp;
  r.false_positive = fp;
  r.true_negative = tn;
  r.false_negative = fn;
  const auto d = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.accuracy = d(tp + tn, r.size());
  r.precision = d(tp, tp + fp);
  r.recall = d(tp, tp + fn);
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

void to_json(json& j, const EvalReport& r) {
  j = json{{"accuracy", r.accuracy},
           {"precision", r.precision},
           {"recall", r.recall},
           {"f1", r.f1},
           {"confusion",
            {{"true_positive", r.true_positive},
             {"false_positive", r.false_positive},
             {"true_negative", r.true_negative},
             {"false_negative", r.false_negative}}},
           {"size", r.size()}};
}

EvalReport evaluate(const TriggerClassifier& model, std::span<const TriggerExample> test, double threshold) {
  if (test.empty()) throw DataError("cannot evaluate on an empty test split");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& e : test) {
    const bool predicted = model.predict(e.text) >= threshold;
    const bool actual = e.label == TriggerLabel::Trigger;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return EvalReport::from_confusion(tp, fp, tn, fn);
}

}  // namespace toxtrig
