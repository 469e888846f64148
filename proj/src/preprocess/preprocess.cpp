#include "utrad/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace utrad::prep {

void PreprocessConfig::validate() const {
  if (!(clip_percentile > 0.0 && clip_percentile <= 100.0)) {
    throw PreconditionError("clip_percentile must lie in (0, 100]");
  }
  if (!(rescale_max > 0.0)) throw PreconditionError("rescale_max must be positive");
  if (!(bin_width > 0.0)) throw PreconditionError("bin_width must be positive");
  for (double s : target_spacing_mm) {
    if (!(s > 0.0)) throw PreconditionError("target spacing must be positive");
  }
}

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw PreconditionError("percentile of empty sample");
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, p);
}

VoxelGrid clip_and_rescale(const VoxelGrid& image, const PreprocessConfig& cfg) {
  if (image.data.empty()) throw PreconditionError("cannot rescale an empty image");
  cfg.validate();
  const double upper = percentile(image.data, cfg.clip_percentile);
  const double lower = *std::min_element(image.data.begin(), image.data.end());
  VoxelGrid out = image;
  const double range = upper - lower;
  for (double& v : out.data) {
    if (!(range > 0.0)) {
      v = 0.0;
      continue;
    }
    const double clipped = std::min(v, upper);
    v = (clipped - lower) / range * cfg.rescale_max;
  }
  return out;
}

Geometry resampled_geometry(const Geometry& source, const Vec3& target) {
  source.validate();
  Geometry g;
  g.origin_mm = source.origin_mm;
  g.spacing_mm = target;
  for (int a = 0; a < 3; ++a) {
    if (!(target[a] > 0.0)) throw PreconditionError("target spacing must be positive");
    const double extent = static_cast<double>(source.dims[a]) * source.spacing_mm[a] / target[a];
    // Guard against 3.0000000000000004 turning into 4.
    const double n = std::ceil(extent - 1e-9);
    if (n < 1.0) throw PreconditionError("resampled dimension would be zero");
    g.dims[a] = static_cast<std::size_t>(n);
  }
  return g;
}

double bspline3(double t) {
  const double a = std::abs(t);
  if (a < 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
  if (a < 2.0) {
    const double b = 2.0 - a;
    return b * b * b / 6.0;
  }
  return 0.0;
}

void bspline_prefilter(std::span<double> c) {
  const std::size_t n = c.size();
  if (n < 2) return;
  const double z = std::sqrt(3.0) - 2.0;
  const double gain = (1.0 - z) * (1.0 - 1.0 / z);
  for (double& v : c) v *= gain;

  // Causal initialization for mirror-symmetric extension (exact sum).
  {
    double zn = z;
    const double iz = 1.0 / z;
    double z2n = std::pow(z, static_cast<double>(n - 1));
    double sum = c[0] + z2n * c[n - 1];
    z2n *= z2n * iz;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      sum += (zn + z2n) * c[k];
      zn *= z;
      z2n *= iz;
    }
    c[0] = sum / (1.0 - zn * zn);
  }
  for (std::size_t k = 1; k < n; ++k) c[k] += z * c[k - 1];
  c[n - 1] = (z / (z * z - 1.0)) * (z * c[n - 2] + c[n - 1]);
  for (std::size_t k = n - 1; k-- > 0;) c[k] = z * (c[k + 1] - c[k]);
}

namespace {

std::size_t mirror(std::int64_t k, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::int64_t>(2 * n - 2);
  k = std::abs(k) % period;
  if (k >= static_cast<std::int64_t>(n)) k = period - k;
  return static_cast<std::size_t>(k);
}

// Replaces grid values by B-spline coefficients along every axis.
std::vector<double> coefficients(const VoxelGrid& image) {
  std::vector<double> c = image.data;
  const auto& d = image.geometry.dims;
  const std::array<std::size_t, 3> stride{1, d[0], d[0] * d[1]};
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t n = d[axis];
    if (n < 2) continue;
    std::vector<double> line(n);
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    for (std::size_t i = 0; i < d[a1]; ++i) {
      for (std::size_t j = 0; j < d[a2]; ++j) {
        const std::size_t base = i * stride[a1] + j * stride[a2];
        for (std::size_t k = 0; k < n; ++k) line[k] = c[base + k * stride[axis]];
        bspline_prefilter(line);
        for (std::size_t k = 0; k < n; ++k) c[base + k * stride[axis]] = line[k];
      }
    }
  }
  return c;
}

struct AxisWeights {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
};

AxisWeights axis_weights(double x, std::size_t n) {
  AxisWeights w;
  const auto first = static_cast<std::int64_t>(std::floor(x)) - 1;
  for (int k = 0; k < 4; ++k) {
    const std::int64_t idx = first + k;
    w.index[k] = mirror(idx, n);
    w.weight[k] = n == 1 ? (k == 1 ? 1.0 : 0.0) : bspline3(x - static_cast<double>(idx));
  }
  return w;
}

}  // namespace

VoxelGrid resample(const VoxelGrid& image, const Vec3& target, Interpolation interpolation) {
  const Geometry out_geom = resampled_geometry(image.geometry, target);
  const auto& src = image.geometry;
  VoxelGrid out(out_geom, 0.0);
  Vec3 ratio{};
  for (int a = 0; a < 3; ++a) ratio[a] = target[a] / src.spacing_mm[a];

  if (interpolation == Interpolation::nearest) {
    for (std::size_t z = 0; z < out_geom.dims[2]; ++z) {
      const auto sz = std::min<std::size_t>(static_cast<std::size_t>(std::llround(z * ratio[2])), src.dims[2] - 1);
      for (std::size_t y = 0; y < out_geom.dims[1]; ++y) {
        const auto sy = std::min<std::size_t>(static_cast<std::size_t>(std::llround(y * ratio[1])), src.dims[1] - 1);
        for (std::size_t x = 0; x < out_geom.dims[0]; ++x) {
          const auto sx = std::min<std::size_t>(static_cast<std::size_t>(std::llround(x * ratio[0])), src.dims[0] - 1);
          out.at(x, y, z) = image.at(sx, sy, sz);
        }
      }
    }
    return out;
  }

  const std::vector<double> c = coefficients(image);
  std::array<std::vector<AxisWeights>, 3> weights;
  for (int a = 0; a < 3; ++a) {
    weights[a].reserve(out_geom.dims[a]);
    for (std::size_t j = 0; j < out_geom.dims[a]; ++j) {
      weights[a].push_back(axis_weights(static_cast<double>(j) * ratio[a], src.dims[a]));
    }
  }
  for (std::size_t z = 0; z < out_geom.dims[2]; ++z) {
    const auto& wz = weights[2][z];
    for (std::size_t y = 0; y < out_geom.dims[1]; ++y) {
      const auto& wy = weights[1][y];
      for (std::size_t x = 0; x < out_geom.dims[0]; ++x) {
        const auto& wx = weights[0][x];
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
          if (wz.weight[k] == 0.0) continue;
          for (int j = 0; j < 4; ++j) {
            const double wzy = wz.weight[k] * wy.weight[j];
            if (wzy == 0.0) continue;
            const std::size_t row = src.linear(0, wy.index[j], wz.index[k]);
            for (int i = 0; i < 4; ++i) sum += wzy * wx.weight[i] * c[row + wx.index[i]];
          }
        }
        out.at(x, y, z) = sum;
      }
    }
  }
  return out;
}

LabelGrid resample_labels(const LabelGrid& labels, const Vec3& target) {
  const Geometry out_geom = resampled_geometry(labels.geometry, target);
  const auto& src = labels.geometry;
  LabelGrid out(out_geom, std::uint16_t{0});
  Vec3 ratio{};
  for (int a = 0; a < 3; ++a) ratio[a] = target[a] / src.spacing_mm[a];
  std::array<std::vector<std::size_t>, 3> nearest;
  for (int a = 0; a < 3; ++a) {
    for (std::size_t j = 0; j < out_geom.dims[a]; ++j) {
      const auto s = static_cast<std::size_t>(std::llround(static_cast<double>(j) * ratio[a]));
      nearest[a].push_back(std::min(s, src.dims[a] - 1));
    }
  }
  for (std::size_t z = 0; z < out_geom.dims[2]; ++z) {
    for (std::size_t y = 0; y < out_geom.dims[1]; ++y) {
      for (std::size_t x = 0; x < out_geom.dims[0]; ++x) {
        out.at(x, y, z) = labels.at(nearest[0][x], nearest[1][y], nearest[2][z]);
      }
    }
  }
  return out;
}

std::vector<int> discretize_values(std::span<const double> values, double bin_width, int& gray_levels) {
  if (values.empty()) throw PreconditionError("cannot discretize an empty ROI");
  if (!(bin_width > 0.0)) throw PreconditionError("bin_width must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  std::vector<int> levels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    levels[i] = static_cast<int>(std::floor((values[i] - lo) / bin_width)) + 1;
  }
  gray_levels = static_cast<int>(std::floor((*hi_it - lo) / bin_width)) + 1;
  return levels;
}

DiscretizedRoi discretize(const VoxelGrid& image, std::span<const Index3> roi, double bin_width) {
  if (roi.empty()) throw PreconditionError("cannot discretize an empty ROI");
  DiscretizedRoi out;
  out.spacing_mm = image.geometry.spacing_mm;
  out.coords.assign(roi.begin(), roi.end());
  out.intensities.reserve(roi.size());
  for (const auto& p : roi) out.intensities.push_back(image.at(p));
  out.levels = discretize_values(out.intensities, bin_width, out.gray_levels);
  return out;
}

}  // namespace utrad::prep
