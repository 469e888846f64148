#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "utrad/classify/serial.hpp"

namespace utrad::ml {

struct LearnerConfig {
  std::string kind = "logreg";  ///< logreg, svm_linear, svm_rbf, random_forest, grad_boost
  double c = 1.0;               ///< logreg and svm
  double gamma = 0.0;           ///< svm_rbf only
  int trees = 0;                ///< random_forest
  int depth = 0;                ///< trees; 0 = unlimited
  int rounds = 0;               ///< grad_boost
  double learning_rate = 0.0;   ///< grad_boost

  std::string params() const;
  bool operator==(const LearnerConfig&) const = default;
};

class Learner {
 public:
  virtual ~Learner() = default;

  /// Positive values predict class 1.
  virtual Eigen::VectorXd decision(const Eigen::MatrixXd& x) const = 0;
  virtual void save(Writer& out) const = 0;

  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

/// Fits with per-sample weights. Throws PreconditionError for a single-class
/// training set. Deterministic for a fixed seed.
std::unique_ptr<Learner> fit_learner(const LearnerConfig& config, const Eigen::MatrixXd& x,
                                     std::span<const int> y, std::span<const double> w,
                                     std::uint64_t seed);

/// Reads a learner written by Learner::save.
std::unique_ptr<Learner> load_learner(Reader& in);

/// sum_i w_i * logloss(y_i, b + x_i . beta) + |beta|^2 / (2C); `coef` holds
/// beta followed by the intercept b.
double logistic_objective(const Eigen::VectorXd& coef, const Eigen::MatrixXd& x,
                          std::span<const int> y, std::span<const double> w, double c);

/// Coefficients (intercept last) of the L2 logistic fit; Newton's method to a
/// gradient max-norm of 1e-8.
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y,
                             std::span<const double> w, double c);

}  // namespace utrad::ml
