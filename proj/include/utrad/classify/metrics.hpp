#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace utrad::ml {

/// Labels and predictions are 0/1. F1 of the positive class,
/// 2TP / (2TP + FP + FN); a zero denominator gives 0.
double f1(std::span<const int> predictions, std::span<const int> labels);
/// Same with per-sample weights on the confusion counts.
double weighted_f1(std::span<const int> predictions, std::span<const int> labels,
                   std::span<const double> weights);

/// F1 of predicting every example positive: 2p / (1 + p), p = n_positive / n_total.
double naive_benchmark(std::size_t n_positive, std::size_t n_total);

/// Minority class weight 1, majority weight n_minority / n_majority.
struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;

  static ClassWeights from_counts(std::size_t n_negative, std::size_t n_positive);
  static ClassWeights from_labels(std::span<const int> labels);
  double operator()(int label) const { return label ? positive : negative; }
  std::vector<double> per_sample(std::span<const int> labels) const;
};

/// Majority of an odd number of 0/1 votes.
int predict_majority(std::span<const int> votes);

}  // namespace utrad::ml
