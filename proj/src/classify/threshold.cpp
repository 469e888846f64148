#include "utrad/classify/threshold.hpp"

#include <algorithm>
#include <numeric>

#include "utrad/classify/metrics.hpp"
#include "utrad/common/error.hpp"

namespace utrad::ml {

int ThresholdClassifier::predict(double value) const {
  if (degenerate) return constant_prediction;
  return positive_above ? (value > threshold ? 1 : 0) : (value < threshold ? 1 : 0);
}

ThresholdClassifier fit_threshold(std::span<const double> values, std::span<const int> labels,
                                  std::span<const double> weights, std::string feature) {
  const std::size_t n = values.size();
  if (labels.size() != n || weights.size() != n) {
    throw PreconditionError("fit_threshold: values, labels and weights differ in length");
  }
  double pos_total = 0.0, neg_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) (labels[i] ? pos_total : neg_total) += weights[i];
  if (pos_total <= 0.0 || neg_total <= 0.0) {
    throw PreconditionError("fit_threshold needs both classes with positive weight");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });

  ThresholdClassifier best;
  best.feature = std::move(feature);
  auto f1_of = [](double tp, double fp, double fn) {
    const double d = 2.0 * tp + fp + fn;
    return d > 0.0 ? 2.0 * tp / d : 0.0;
  };

  double best_f1 = -1.0, best_gap = -1.0;
  double pos_le = 0.0, neg_le = 0.0;  // weight at or below the current value
  for (std::size_t i = 0; i < n;) {
    const double v = values[order[i]];
    while (i < n && values[order[i]] == v) {
      (labels[order[i]] ? pos_le : neg_le) += weights[order[i]];
      ++i;
    }
    if (i == n) break;
    const double next = values[order[i]];
    const double t = 0.5 * (v + next);
    const double gap = next - v;
    const double above = f1_of(pos_total - pos_le, neg_total - neg_le, pos_le);
    const double below = f1_of(pos_le, neg_le, pos_total - pos_le);
    for (const auto& [score, up] : {std::pair{above, true}, std::pair{below, false}}) {
      const double tol = 1e-12;
      if (score > best_f1 + tol || (score > best_f1 - tol && gap > best_gap)) {
        best_f1 = score;
        best_gap = gap;
        best.threshold = t;
        best.positive_above = up;
      }
    }
  }

  if (best_f1 < 0.0) {
    best.degenerate = true;
    best.threshold = n ? values[0] : 0.0;
    best.constant_prediction = pos_total > neg_total ? 1 : 0;
    best.training_f1 = best.constant_prediction ? f1_of(pos_total, neg_total, 0.0) : 0.0;
    return best;
  }
  best.training_f1 = best_f1;
  return best;
}

TestReport score_models(const std::vector<std::vector<int>>& predictions,
                        std::span<const int> labels) {
  if (predictions.empty()) throw PreconditionError("no models to score");
  TestReport out;
  for (const auto& p : predictions) out.per_model_f1.push_back(f1(p, labels));
  out.f1 = unit_interval(out.per_model_f1);
  out.majority.resize(labels.size());
  std::vector<int> votes(predictions.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t m = 0; m < predictions.size(); ++m) votes[m] = predictions[m][i];
    out.majority[i] = predict_majority(votes);
  }
  out.majority_f1 = f1(out.majority, labels);
  return out;
}

TestReport SingleFeatureResult::evaluate(std::span<const double> values,
                                         std::span<const int> labels) const {
  std::vector<std::vector<int>> preds;
  for (const auto& clf : folds) {
    std::vector<int> p(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) p[i] = clf.predict(values[i]);
    preds.push_back(std::move(p));
  }
  return score_models(preds, labels);
}

std::vector<SingleFeatureResult> single_feature_study(const Eigen::MatrixXd& table,
                                                      const std::vector<std::string>& names,
                                                      std::span<const int> labels,
                                                      const FoldPlan& plan) {
  if (static_cast<std::size_t>(table.cols()) != names.size() ||
      static_cast<std::size_t>(table.rows()) != labels.size() || plan.fold.size() != labels.size()) {
    throw PreconditionError("single_feature_study: table, names, labels and folds disagree");
  }
  std::vector<SingleFeatureResult> out(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    SingleFeatureResult& r = out[c];
    r.feature = names[c];
    r.column = c;
    for (int f = 0; f < plan.k; ++f) {
      const auto train = plan.train_indices(f);
      const auto val = plan.validation_indices(f);
      std::vector<double> x, w(train.size(), 1.0);
      std::vector<int> y;
      for (auto i : train) {
        x.push_back(table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
        y.push_back(labels[i]);
      }
      ThresholdClassifier clf = fit_threshold(x, y, w, names[c]);
      std::vector<int> pred, truth;
      for (auto i : val) {
        pred.push_back(clf.predict(table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c))));
        truth.push_back(labels[i]);
      }
      r.validation_f1.push_back(f1(pred, truth));
      r.folds.push_back(std::move(clf));
    }
    r.validation = unit_interval(r.validation_f1);
  }
  return out;
}

const SingleFeatureResult& best_single_feature(const std::vector<SingleFeatureResult>& results) {
  if (results.empty()) throw PreconditionError("no single-feature results");
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].validation.mean > results[best].validation.mean) best = i;
  }
  return results[best];
}

}  // namespace utrad::ml
