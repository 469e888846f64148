#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace utrad::curve {

/// D(n) = ym - (ym - y0) * exp(-k n)
struct PlateauModel {
  double y0 = 0.0;
  double ym = 0.0;
  double k = 0.0;

  double operator()(double n) const;
};

struct CurvePoint {
  double n = 0.0;
  double dsc = 0.0;
};

struct PlateauFit {
  PlateauModel model;
  double rss = 0.0;
  bool degenerate = false;  ///< flat data: ym == y0, k arbitrary
  bool converged = true;    ///< false when refinement failed and a grid start was kept
};

/// Least squares over a log-spaced k grid (y0, ym solved exactly per k)
/// followed by damped Gauss-Newton on (y0, ym, log k). Needs three distinct n
/// and dsc values in [0,1]; throws InputError for decreasing data.
PlateauFit fit_plateau(std::span<const CurvePoint> points);

/// Residual sum of squares of a model on the points.
double residual(const PlateauModel& model, std::span<const CurvePoint> points);

/// Smallest integer n >= 0 with D(n) >= (1 - tolerance) * ym.
std::int64_t plateau_point(const PlateauModel& model, double tolerance = 0.01);

}  // namespace utrad::curve
