#include "utrad/bayes.hpp"

#include <cmath>
#include <cstdio>

#include "utrad/common/error.hpp"

namespace utrad::bayes {

OperatingPoint OperatingPoint::from_counts(std::int64_t tp, std::int64_t fn, std::int64_t fp, std::int64_t tn) {
  if (tp < 0 || fn < 0 || fp < 0 || tn < 0) throw PreconditionError("confusion counts must be nonnegative");
  if (tp + fn == 0) throw PreconditionError("no positive cases: true positive rate undefined");
  if (fp + tn == 0) throw PreconditionError("no negative cases: false positive rate undefined");
  OperatingPoint op{static_cast<double>(tp) / static_cast<double>(tp + fn),
                    static_cast<double>(fp) / static_cast<double>(fp + tn)};
  op.validate();
  return op;
}

void OperatingPoint::validate() const {
  if (!(tpr >= 0.0 && tpr <= 1.0)) throw PreconditionError("true positive rate outside [0,1]");
  if (!(fpr > 0.0 && fpr <= 1.0)) {
    throw PreconditionError("false positive rate must lie in (0,1] for a finite likelihood ratio");
  }
}

double posterior_probability(double prior, const OperatingPoint& op) {
  if (!(prior > 0.0 && prior < 1.0)) throw PreconditionError("prior must lie strictly between 0 and 1");
  op.validate();
  const double odds = prior / (1.0 - prior) * op.likelihood_ratio();
  return odds / (1.0 + odds);
}

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const double magnitude = std::floor(std::log10(std::abs(x)));
  const double scale = std::pow(10.0, digits - 1 - magnitude);
  return std::round(x * scale) / scale;
}

std::int64_t one_in_n(double probability) {
  if (!(probability > 0.0 && probability <= 1.0)) throw PreconditionError("probability must lie in (0,1]");
  return static_cast<std::int64_t>(std::llround(1.0 / round_significant(probability, 2)));
}

std::string describe(double probability) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g (1 in %lld)", probability, static_cast<long long>(one_in_n(probability)));
  return buf;
}

}  // namespace utrad::bayes
