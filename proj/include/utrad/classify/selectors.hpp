#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "utrad/classify/serial.hpp"

namespace utrad::ml {

struct SelectorConfig {
  std::string method = "none";  ///< none, topk_mi, mrmr, stability, lasso, pca
  int k = 0;                    ///< K for topk_mi/mrmr/pca, target count for lasso

  std::string params() const;
  bool operator==(const SelectorConfig&) const = default;
};

/// Stability selection settings; fixed, not part of the grid.
inline constexpr int kStabilityRuns = 100;
inline constexpr double kStabilityFraction = 0.5;
inline constexpr double kStabilityThreshold = 0.6;
inline constexpr int kStabilityTarget = 10;

struct LassoPathResult {
  std::vector<std::size_t> selected;  ///< nonzero coefficients, ascending
  double lambda = 0.0;
  bool reached_target = false;
};

/// Weighted L1-penalized logistic regression on standardized columns,
///   (1/W) sum_i w_i logloss_i + lambda * |beta|_1,
/// solved by coordinate descent along lambda_max * 1e-3^(j/99), j = 0..99,
/// stopping at the first (largest) lambda with >= target nonzero coefficients.
LassoPathResult lasso_path(const Eigen::MatrixXd& x, std::span<const int> y,
                           std::span<const double> w, int target);

/// Coefficients (intercept last) at a single lambda, from a zero start.
Eigen::VectorXd lasso_logistic(const Eigen::MatrixXd& x, std::span<const int> y,
                               std::span<const double> w, double lambda);

/// Greedy minimum-redundancy maximum-relevance ranking (relevance minus mean
/// redundancy, both plug-in MI on equal-frequency bins); returns K columns in
/// pick order.
std::vector<std::size_t> mrmr_rank(const Eigen::MatrixXd& x, std::span<const int> y, int k);

class Selector {
 public:
  static Selector fit(const SelectorConfig& config, const Eigen::MatrixXd& x,
                      std::span<const int> y, std::span<const double> w, std::uint64_t seed);

  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;

  const SelectorConfig& config() const { return config_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const;
  /// Kept columns (empty for pca and none).
  const std::vector<std::size_t>& indices() const { return indices_; }
  /// PCA loadings, one component per column.
  const Eigen::MatrixXd& components() const { return components_; }
  const Eigen::VectorXd& explained_variance() const { return variance_; }
  /// Set when a fallback was used (empty stability set, lasso short of target).
  bool flagged() const { return flagged_; }

  void save(Writer& out) const;
  static Selector load(Reader& in);

 private:
  SelectorConfig config_;
  std::size_t input_dim_ = 0;
  std::vector<std::size_t> indices_;
  Eigen::VectorXd center_;
  Eigen::MatrixXd components_;
  Eigen::VectorXd variance_;
  bool flagged_ = false;
};

}  // namespace utrad::ml
