#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "utrad/classify/folds.hpp"
#include "utrad/common/interval.hpp"

namespace utrad::ml {

struct ThresholdClassifier {
  std::string feature;
  double threshold = 0.0;
  bool positive_above = true;
  /// Constant training feature: predicts `constant_prediction` everywhere.
  bool degenerate = false;
  int constant_prediction = 0;
  double training_f1 = 0.0;

  int predict(double value) const;
};

/// Scans midpoints of consecutive distinct values in both directions and keeps
/// the best weighted F1 of the positive class. Ties go to the widest gap, then
/// the lower threshold, then positive-above.
ThresholdClassifier fit_threshold(std::span<const double> values, std::span<const int> labels,
                                  std::span<const double> weights, std::string feature = {});

/// Mean-of-k-models F1 on a held-out set, plus the majority vote per instance.
struct TestReport {
  std::vector<double> per_model_f1;
  Interval f1;
  std::vector<int> majority;
  double majority_f1 = 0.0;
};

struct SingleFeatureResult {
  std::string feature;
  std::size_t column = 0;
  std::vector<ThresholdClassifier> folds;
  std::vector<double> validation_f1;
  Interval validation;

  TestReport evaluate(std::span<const double> values, std::span<const int> labels) const;
};

/// One threshold classifier per fold and feature, fitted on the training
/// portion (unit weights) and scored on the validation fold.
std::vector<SingleFeatureResult> single_feature_study(const Eigen::MatrixXd& table,
                                                      const std::vector<std::string>& names,
                                                      std::span<const int> labels,
                                                      const FoldPlan& plan);

/// Highest mean validation F1; ties keep the earlier column.
const SingleFeatureResult& best_single_feature(const std::vector<SingleFeatureResult>& results);

/// Scores k per-model prediction vectors against labels.
TestReport score_models(const std::vector<std::vector<int>>& predictions,
                        std::span<const int> labels);

}  // namespace utrad::ml
