#include <doctest.h>

#include <cmath>
#include <limits>

#include "utrad/common/rng.hpp"
#include "utrad/common/error.hpp"
#include "utrad/learncurve.hpp"

using namespace utrad;
using namespace utrad::curve;

namespace {

std::vector<CurvePoint> sample(const PlateauModel& m, double noise = 0.0, std::uint64_t seed = 0) {
  Rng rng(seed);
  std::vector<CurvePoint> pts;
  for (double n : {25.0, 45.0, 65.0, 85.0}) pts.push_back({n, m(n) + noise * rng.normal()});
  return pts;
}

// Brute-force least squares: dense grid over (y0, ym, k).
PlateauModel grid_oracle(const std::vector<CurvePoint>& pts) {
  PlateauModel best{};
  double best_rss = std::numeric_limits<double>::infinity();
  for (double k = 0.002; k <= 0.1; k += 0.0005)
    for (double y0 = 0.0; y0 <= 0.9; y0 += 0.005)
      for (double ym = y0; ym <= 1.0; ym += 0.0025) {
        const PlateauModel m{y0, ym, k};
        const double r = residual(m, pts);
        if (r < best_rss) {
          best_rss = r;
          best = m;
        }
      }
  return best;
}

}  // namespace

TEST_CASE("noise-free data recovers the generating parameters") {
  const PlateauModel truth{0.5, 0.9, 0.02};
  const auto fit = fit_plateau(sample(truth));
  CHECK(std::abs(fit.model.y0 - 0.5) < 1e-3);
  CHECK(std::abs(fit.model.ym - 0.9) < 1e-3);
  CHECK(std::abs(fit.model.k - 0.02) < 1e-3);
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("noisy data recovers the asymptote and beats a dense grid") {
  const PlateauModel truth{0.5, 0.9, 0.02};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto pts = sample(truth, 0.005, seed);
    const auto fit = fit_plateau(pts);
    const auto oracle = grid_oracle(pts);
    CHECK(fit.rss <= residual(oracle, pts) + 1e-12);
    CHECK(std::abs(fit.model.ym - oracle.ym) < 0.02);
  }
}

TEST_CASE("flat data is a degenerate fit") {
  const std::vector<CurvePoint> pts{{25, 0.8}, {45, 0.8}, {65, 0.8}};
  const auto fit = fit_plateau(pts);
  CHECK(fit.degenerate);
  CHECK(fit.model.y0 == doctest::Approx(0.8));
  CHECK(fit.model.ym == doctest::Approx(0.8));
  CHECK(plateau_point(fit.model) == 0);
}

TEST_CASE("fit preconditions") {
  CHECK_THROWS(fit_plateau(std::vector<CurvePoint>{{25, 0.5}, {45, 0.6}}));
  CHECK_THROWS(fit_plateau(std::vector<CurvePoint>{{25, 0.5}, {25, 0.6}, {45, 0.7}}));
  CHECK_THROWS(fit_plateau(std::vector<CurvePoint>{{25, 0.5}, {45, 1.2}, {65, 0.7}}));
  CHECK_THROWS_AS(fit_plateau(std::vector<CurvePoint>{{25, 0.9}, {45, 0.8}, {65, 0.7}, {85, 0.65}}), InputError);
}

TEST_CASE("plateau point by closed form and integer scan") {
  const PlateauModel m{0.5, 0.9, 0.02};
  const auto n = plateau_point(m);
  CHECK(n == 190);
  std::int64_t scan = 0;
  while (m(static_cast<double>(scan)) < 0.99 * m.ym) ++scan;
  CHECK(scan == n);
  CHECK(m(190.0) >= 0.891);
  CHECK(m(189.0) < 0.891);
  CHECK_THROWS(plateau_point(m, 0.0));
  CHECK_THROWS(plateau_point(PlateauModel{0.0, 0.0, 0.1}));
}

TEST_CASE("plateau point bracket property over random models") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const double y0 = rng.uniform(0.0, 0.8);
    const PlateauModel m{y0, rng.uniform(y0 + 0.01, 1.0), rng.uniform(0.001, 0.5)};
    const auto n = plateau_point(m);
    CHECK(m(static_cast<double>(n)) >= 0.99 * m.ym);
    if (n > 0) CHECK(m(static_cast<double>(n - 1)) < 0.99 * m.ym);
    for (double x = 0; x < 50; x += 1) CHECK(m(x + 1) >= m(x));
  }
}
