#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "utrad/radiomics/features.hpp"
#include "utrad/radiomics/mesh.hpp"

namespace utrad::radiomics {

namespace {

struct Diameters {
  double max3d = 0.0;
  double slice = 0.0;   // pairs sharing a z index
  double column = 0.0;  // pairs sharing a y index
  double row = 0.0;     // pairs sharing an x index
};

// Max pairwise distances between centers of surface voxels (ROI voxels with a
// face neighbor outside the ROI).
Diameters diameters(std::span<const Index3> roi, const Vec3& spacing) {
  const std::set<Index3> voxels(roi.begin(), roi.end());
  std::vector<Index3> surface;
  constexpr std::array<Index3, 6> faces{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  for (const auto& p : voxels) {
    for (const auto& f : faces) {
      if (!voxels.count({p[0] + f[0], p[1] + f[1], p[2] + f[2]})) {
        surface.push_back(p);
        break;
      }
    }
  }
  Diameters d;
  double best3 = 0.0, bs = 0.0, bc = 0.0, br = 0.0;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const auto& a = surface[i];
    for (std::size_t j = i + 1; j < surface.size(); ++j) {
      const auto& b = surface[j];
      const double dx = static_cast<double>(a[0] - b[0]) * spacing[0];
      const double dy = static_cast<double>(a[1] - b[1]) * spacing[1];
      const double dz = static_cast<double>(a[2] - b[2]) * spacing[2];
      const double d2 = dx * dx + dy * dy + dz * dz;
      best3 = std::max(best3, d2);
      if (a[2] == b[2]) bs = std::max(bs, d2);
      if (a[1] == b[1]) bc = std::max(bc, d2);
      if (a[0] == b[0]) br = std::max(br, d2);
    }
  }
  d.max3d = std::sqrt(best3);
  d.slice = std::sqrt(bs);
  d.column = std::sqrt(bc);
  d.row = std::sqrt(br);
  return d;
}

// Eigenvalues of the sample covariance of physical voxel positions, descending.
std::array<double, 3> principal_moments(std::span<const Index3> roi, const Vec3& spacing) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  if (roi.size() < 2) return out;
  // Offsets from the first voxel keep the sums exactly translation invariant.
  const Index3 first = roi.front();
  const auto position = [&](const Index3& p) {
    return Eigen::Vector3d((p[0] - first[0]) * spacing[0], (p[1] - first[1]) * spacing[1],
                           (p[2] - first[2]) * spacing[2]);
  };
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : roi) mean += position(p);
  mean /= static_cast<double>(roi.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : roi) {
    const Eigen::Vector3d d = position(p) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(roi.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();  // ascending
  for (int k = 0; k < 3; ++k) out[k] = std::max(0.0, ev[2 - k]);
  return out;
}

}  // namespace

std::vector<double> shape_features(std::span<const Index3> roi, const Vec3& spacing) {
  if (roi.empty()) throw PreconditionError("shape features need a nonempty ROI");
  const auto mesh = marching_cubes(roi, spacing);
  const MeshMeasures mm = measure(mesh);
  const double volume = mm.volume_mm3;
  const double area = mm.area_mm2;
  const double voxel_volume = static_cast<double>(roi.size()) * spacing[0] * spacing[1] * spacing[2];
  const double sphericity = std::cbrt(36.0 * std::numbers::pi * volume * volume) / area;
  const Diameters d = diameters(roi, spacing);
  const auto [major, minor, least] = principal_moments(roi, spacing);
  const double elongation = major > 0.0 ? std::sqrt(minor / major) : 1.0;
  const double flatness = major > 0.0 ? std::sqrt(least / major) : 1.0;
  return {
      volume,
      voxel_volume,
      area,
      area / volume,
      sphericity,
      d.max3d,
      d.slice,
      d.column,
      d.row,
      4.0 * std::sqrt(major),
      4.0 * std::sqrt(minor),
      4.0 * std::sqrt(least),
      elongation,
      flatness,
  };
}

}  // namespace utrad::radiomics
