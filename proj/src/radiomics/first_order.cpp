#include <algorithm>
#include <cmath>
#include <map>

#include "utrad/radiomics/features.hpp"

namespace utrad::radiomics {

std::vector<double> first_order_features(std::span<const double> x, std::span<const int> levels,
                                         double voxel_volume) {
  if (x.empty()) throw PreconditionError("first-order features need a nonempty ROI");
  if (levels.size() != x.size()) throw PreconditionError("levels and intensities differ in length");
  const auto n = static_cast<double>(x.size());
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const auto pct = [&sorted](double p) { return prep::percentile_sorted(sorted, p); };

  double sum = 0.0, sum_sq = 0.0;
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    mad += std::abs(d);
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  mad /= n;

  const double p10 = pct(10.0);
  const double p90 = pct(90.0);
  double robust_sum = 0.0;
  std::size_t robust_n = 0;
  for (double v : x) {
    if (v >= p10 && v <= p90) {
      robust_sum += v;
      ++robust_n;
    }
  }
  double rmad = 0.0;
  if (robust_n > 0) {
    const double robust_mean = robust_sum / static_cast<double>(robust_n);
    for (double v : x) {
      if (v >= p10 && v <= p90) rmad += std::abs(v - robust_mean);
    }
    rmad /= static_cast<double>(robust_n);
  }

  std::map<int, double> histogram;
  for (int g : levels) histogram[g] += 1.0;
  double entropy = 0.0, uniformity = 0.0;
  for (const auto& [g, count] : histogram) {
    const double p = count / n;
    entropy -= p * std::log2(p);
    uniformity += p * p;
  }

  const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;

  return {
      sum_sq,
      sum_sq * voxel_volume,
      entropy,
      sorted.front(),
      p10,
      p90,
      sorted.back(),
      mean,
      pct(50.0),
      pct(75.0) - pct(25.0),
      sorted.back() - sorted.front(),
      mad,
      rmad,
      std::sqrt(sum_sq / n),
      skewness,
      kurtosis,
      m2,
      uniformity,
  };
}

std::vector<double> first_order_features(std::span<const double> x, double bin_width, double voxel_volume) {
  int gray_levels = 0;
  const auto levels = prep::discretize_values(x, bin_width, gray_levels);
  return first_order_features(x, levels, voxel_volume);
}

}  // namespace utrad::radiomics
