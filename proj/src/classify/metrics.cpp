#include "utrad/classify/metrics.hpp"

#include <string>

#include "utrad/common/error.hpp"

namespace utrad::ml {

double weighted_f1(std::span<const int> predictions, std::span<const int> labels,
                   std::span<const double> weights) {
  if (predictions.size() != labels.size() || weights.size() != labels.size()) {
    throw PreconditionError("f1: predictions, labels and weights differ in length");
  }
  if (labels.empty()) throw PreconditionError("f1 of an empty sample");
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] && labels[i]) tp += weights[i];
    else if (predictions[i]) fp += weights[i];
    else if (labels[i]) fn += weights[i];
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

double f1(std::span<const int> predictions, std::span<const int> labels) {
  const std::vector<double> ones(labels.size(), 1.0);
  return weighted_f1(predictions, labels, ones);
}

double naive_benchmark(std::size_t n_positive, std::size_t n_total) {
  if (n_positive == 0 || n_positive > n_total) {
    throw PreconditionError("naive benchmark needs 0 < n_positive <= n_total");
  }
  const double p = static_cast<double>(n_positive) / static_cast<double>(n_total);
  return 2.0 * p / (1.0 + p);
}

ClassWeights ClassWeights::from_counts(std::size_t n_negative, std::size_t n_positive) {
  if (n_negative == 0 || n_positive == 0) {
    throw PreconditionError("class weights need both classes present");
  }
  ClassWeights w;
  if (n_negative > n_positive) {
    w.negative = static_cast<double>(n_positive) / static_cast<double>(n_negative);
  } else if (n_positive > n_negative) {
    w.positive = static_cast<double>(n_negative) / static_cast<double>(n_positive);
  }
  return w;
}

ClassWeights ClassWeights::from_labels(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int y : labels) pos += y != 0;
  return from_counts(labels.size() - pos, pos);
}

std::vector<double> ClassWeights::per_sample(std::span<const int> labels) const {
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = (*this)(labels[i]);
  return w;
}

int predict_majority(std::span<const int> votes) {
  if (votes.size() % 2 == 0) {
    throw PreconditionError("majority vote needs an odd number of votes, got " +
                            std::to_string(votes.size()));
  }
  std::size_t ones = 0;
  for (int v : votes) ones += v != 0;
  return 2 * ones > votes.size() ? 1 : 0;
}

}  // namespace utrad::ml
