#pragma once

#include <cstdint>
#include <string>

namespace utrad::bayes {

struct OperatingPoint {
  double tpr = 0.0;  ///< in [0, 1]
  double fpr = 1.0;  ///< in (0, 1]

  /// tpr = tp / (tp + fn), fpr = fp / (fp + tn).
  static OperatingPoint from_counts(std::int64_t tp, std::int64_t fn, std::int64_t fp, std::int64_t tn);
  void validate() const;
  double likelihood_ratio() const { return tpr / fpr; }
};

/// Posterior probability from prior odds times the positive likelihood ratio.
double posterior_probability(double prior, const OperatingPoint& op);

/// Rounds to `digits` significant figures.
double round_significant(double x, int digits);

/// The "1 in N" form: N = round(1 / p) with p first rounded to two
/// significant figures, the precision risk figures are quoted at.
std::int64_t one_in_n(double probability);

/// e.g. "0.04543 (1 in 22)": four significant digits plus the 1-in-N form.
std::string describe(double probability);

}  // namespace utrad::bayes
