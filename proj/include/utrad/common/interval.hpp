#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "utrad/common/error.hpp"

namespace utrad {

/// Mean with a normal-approximation 95% interval, mean +/- 1.96 * sample sd,
/// truncated to [0, 1]. Used for Dice summaries and F1 scores alike.
struct Interval {
  double mean = 0.0;
  double sd = 0.0;
  double low = 0.0;
  double high = 0.0;
};

inline Interval unit_interval(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("interval of an empty sample");
  Interval out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  out.low = std::clamp(out.mean - 1.96 * out.sd, 0.0, 1.0);
  out.high = std::clamp(out.mean + 1.96 * out.sd, 0.0, 1.0);
  return out;
}

}  // namespace utrad
