#include "utrad/learncurve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "utrad/common/error.hpp"

namespace utrad::curve {

double PlateauModel::operator()(double n) const { return ym - (ym - y0) * std::exp(-k * n); }

double residual(const PlateauModel& model, std::span<const CurvePoint> points) {
  double rss = 0.0;
  for (const auto& p : points) {
    const double r = model(p.n) - p.dsc;
    rss += r * r;
  }
  return rss;
}

namespace {

// Optimal (y0, ym) for a fixed rate; the model is linear in them.
PlateauModel solve_linear(std::span<const CurvePoint> points, double k) {
  Eigen::MatrixXd a(points.size(), 2);
  Eigen::VectorXd b(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double e = std::exp(-k * points[i].n);
    a(i, 0) = e;
    a(i, 1) = 1.0 - e;
    b(i) = points[i].dsc;
  }
  const Eigen::Vector2d x = a.completeOrthogonalDecomposition().solve(b);
  return {x(0), x(1), k};
}

struct Refined {
  PlateauModel model;
  double rss;
  bool ok;
};

// Levenberg-style damped Gauss-Newton on (y0, ym, log k).
Refined refine(const PlateauModel& start, std::span<const CurvePoint> points) {
  constexpr int kMaxIterations = 500;
  constexpr double kTolerance = 1e-10;
  Eigen::Vector3d theta(start.y0, start.ym, std::log(start.k));
  const auto model_of = [](const Eigen::Vector3d& t) { return PlateauModel{t(0), t(1), std::exp(t(2))}; };
  double rss = residual(start, points);
  double lambda = 1e-3;
  bool converged = false;
  for (int iter = 0; iter < kMaxIterations && !converged; ++iter) {
    const PlateauModel m = model_of(theta);
    Eigen::MatrixXd j(points.size(), 3);
    Eigen::VectorXd r(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double n = points[i].n;
      const double e = std::exp(-m.k * n);
      j(i, 0) = e;
      j(i, 1) = 1.0 - e;
      j(i, 2) = (m.ym - m.y0) * n * m.k * e;
      r(i) = m(n) - points[i].dsc;
    }
    const Eigen::Matrix3d jtj = j.transpose() * j;
    const Eigen::Vector3d g = j.transpose() * r;
    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::Matrix3d damped = jtj;
      for (int d = 0; d < 3; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      const Eigen::Vector3d step = damped.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::Vector3d next = theta + step;
      const double next_rss = residual(model_of(next), points);
      if (std::isfinite(next_rss) && next_rss <= rss) {
        const double change = rss - next_rss;
        theta = next;
        converged = change <= kTolerance * std::max(rss, 1e-300) || next_rss == 0.0;
        rss = next_rss;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) converged = true;  // no descent direction left: local minimum
  }
  return {model_of(theta), rss, converged};
}

}  // namespace

PlateauFit fit_plateau(std::span<const CurvePoint> points) {
  std::set<double> distinct;
  for (const auto& p : points) {
    if (!(p.dsc >= 0.0 && p.dsc <= 1.0)) throw InputError("learning-curve DSC outside [0,1]");
    if (!(p.n >= 0.0)) throw InputError("learning-curve size must be nonnegative");
    distinct.insert(p.n);
  }
  if (distinct.size() < 3) throw InputError("learning-curve fit needs at least three distinct training sizes");

  PlateauFit fit;
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const CurvePoint& a, const CurvePoint& b) { return a.dsc < b.dsc; });
  if (hi->dsc - lo->dsc <= 1e-12) {
    double mean = 0.0;
    for (const auto& p : points) mean += p.dsc;
    mean /= static_cast<double>(points.size());
    fit.model = {mean, mean, 1.0};
    fit.rss = residual(fit.model, points);
    fit.degenerate = true;
    return fit;
  }

  // Rates from 1e-5 to 10 per image, 40 per decade.
  PlateauModel best{};
  double best_rss = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 240; ++i) {
    const double k = std::pow(10.0, -5.0 + i / 40.0);
    const PlateauModel m = solve_linear(points, k);
    const double rss = residual(m, points);
    if (rss < best_rss) {
      best_rss = rss;
      best = m;
    }
  }
  const Refined r = refine(best, points);
  if (r.rss <= best_rss && std::isfinite(r.rss)) {
    fit.model = r.model;
    fit.rss = r.rss;
    fit.converged = r.ok;
  } else {
    fit.model = best;
    fit.rss = best_rss;
    fit.converged = false;
  }
  if (fit.model.ym < fit.model.y0) {
    throw InputError("learning curve is decreasing (fitted asymptote below starting value)");
  }
  return fit;
}

std::int64_t plateau_point(const PlateauModel& model, double tolerance) {
  if (!(model.ym > 0.0)) throw PreconditionError("plateau point needs a positive asymptote");
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw PreconditionError("plateau tolerance must lie in (0,1); the asymptote itself is never reached");
  }
  if (model.ym < model.y0) throw PreconditionError("plateau point needs ym >= y0");
  if (model.ym == model.y0) return 0;
  if (!(model.k > 0.0)) throw PreconditionError("plateau point needs a positive rate");
  const double x = std::log((model.ym - model.y0) / (tolerance * model.ym)) / model.k;
  if (x <= 0.0) return 0;
  auto n = static_cast<std::int64_t>(std::ceil(x));
  // Guard the closed form against round-off at integer boundaries.
  const double target = (1.0 - tolerance) * model.ym;
  while (n > 0 && model(static_cast<double>(n - 1)) >= target) --n;
  while (model(static_cast<double>(n)) < target) ++n;
  return n;
}

}  // namespace utrad::curve
