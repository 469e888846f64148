#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "utrad/classify/folds.hpp"
#include "utrad/classify/learners.hpp"
#include "utrad/classify/selectors.hpp"
#include "utrad/classify/threshold.hpp"
#include "utrad/common/interval.hpp"
#include "utrad/stats.hpp"

namespace utrad::ml {

/// Training rows of one binary task.
struct TaskData {
  Eigen::MatrixXd x;
  std::vector<int> y;
  std::vector<std::string> groups;  ///< patient id per row
  std::vector<std::string> feature_names;

  void validate() const;
};

std::vector<SelectorConfig> default_selector_grid();
std::vector<LearnerConfig> default_learner_grid();
/// FNV-1a over the canonical text of both grids.
std::uint64_t grid_hash(const std::vector<SelectorConfig>& selectors,
                        const std::vector<LearnerConfig>& learners);

struct ComboResult {
  SelectorConfig selector;
  LearnerConfig learner;
  std::vector<double> train_f1;
  std::vector<double> validation_f1;
  Interval train;
  Interval validation;
  double mean_features = 0.0;  ///< selector output width averaged over folds
};

/// Selection order: higher mean validation F1, fewer features, then selector
/// name, learner name and parameter strings.
bool better_combo(const ComboResult& a, const ComboResult& b);

struct FoldModel {
  stats::Normalizer normalizer;
  Selector selector;
  std::shared_ptr<const Learner> learner;

  std::vector<int> predict(const Eigen::MatrixXd& raw) const;
};

struct TrainedPipeline {
  std::uint64_t seed = 0;
  std::uint64_t grid_hash = 0;
  /// Task the pipeline was trained for; class names as written in the data.
  std::string task = "-";
  std::vector<std::string> positive_classes;
  std::vector<std::string> negative_classes;
  std::vector<std::string> feature_names;
  SelectorConfig selector;
  LearnerConfig learner;
  std::vector<FoldModel> folds;
  std::vector<double> train_f1;
  std::vector<double> validation_f1;
  Interval validation;
};

struct GridSearchResult {
  TrainedPipeline best;
  std::vector<ComboResult> table;  ///< selector-major, learner-minor order
};

/// Per fold: normalizer, selector and learner are fitted on the training
/// portion only, with class weights from that portion. The winner maximizes
/// mean validation F1; ties go to fewer selected features, then selector
/// name, learner name, and parameter strings. Combinations whose K exceeds
/// the feature count are skipped.
GridSearchResult grid_search(const TaskData& data, const FoldPlan& plan,
                             const std::vector<SelectorConfig>& selectors,
                             const std::vector<LearnerConfig>& learners, std::uint64_t seed,
                             unsigned threads = 1);

/// Scores each fold model on the test rows; columns are matched by name and
/// any mismatch with the training schema throws InputError naming them.
TestReport evaluate_test(const TrainedPipeline& pipeline, const Eigen::MatrixXd& test,
                         const std::vector<std::string>& columns, std::span<const int> labels);

std::string serialize(const TrainedPipeline& pipeline);
TrainedPipeline deserialize(const std::string& text);

}  // namespace utrad::ml
