#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace utrad::stats {

struct MannWhitney {
  double u = 0.0;  ///< min(Ux, Uy) with midranks
  double p = 1.0;  ///< two-sided
  bool exact = false;
};

/// Exact null distribution when |x|+|y| <= 16 without ties, otherwise normal
/// approximation with tie-corrected variance and continuity correction.
MannWhitney mann_whitney_u(std::span<const double> x, std::span<const double> y);

/// Column-wise z-scores with training mean and sample sd. Constant training
/// columns map to 0.
class Normalizer {
 public:
  static Normalizer fit(const Eigen::MatrixXd& train);
  /// Rebuild a fitted normalizer from stored statistics.
  static Normalizer from_params(Eigen::VectorXd mean, Eigen::VectorXd sd);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& table) const;

  bool fitted() const { return fitted_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& sd() const { return sd_; }
  /// Indices of columns with zero training variance.
  std::vector<std::size_t> constant_columns() const;

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd sd_;
  bool fitted_ = false;
};

/// Equal-frequency bin index per value with B = min(10, #distinct) bins.
/// With at most 10 distinct values each value gets its own bin; otherwise a
/// value goes to floor(B * #values-below / n), so ties share a bin.
std::vector<int> equal_frequency_bins(std::span<const double> values, int max_bins = 10);

/// Plug-in mutual information (nats) between a binned feature and a label.
double mutual_information(std::span<const double> feature, std::span<const int> labels);

/// Plug-in mutual information (nats) between two discrete codings.
double mutual_information_discrete(std::span<const int> a, std::span<const int> b);

/// Test on a 2 x c contingency table (rows = groups). Fisher-Freeman-Halton
/// exact test when any expected count is below 5 (and enumeration is
/// feasible), Pearson chi-square otherwise.
struct TableTest {
  double p = 1.0;
  std::string method;  ///< "fisher" or "chi-square"
};
TableTest contingency_test(const std::vector<std::vector<double>>& table);

struct Covariate {
  std::string name;
  bool ordered = false;  ///< Mann-Whitney when true, contingency test otherwise
  std::vector<double> group_a;
  std::vector<double> group_b;
};

struct CovariateResult {
  std::string name;
  std::string method;
  double p = 1.0;
};

std::vector<CovariateResult> compare_covariates(const std::vector<Covariate>& covariates);

}  // namespace utrad::stats
