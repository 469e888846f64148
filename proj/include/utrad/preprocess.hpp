#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "utrad/volume/grid.hpp"

namespace utrad::prep {

struct PreprocessConfig {
  double clip_percentile = 99.9;
  double rescale_max = 255.0;
  Vec3 target_spacing_mm{0.75, 0.75, 5.0};
  double bin_width = 25.0;

  /// Throws PreconditionError when a field is out of range.
  void validate() const;
};

enum class Interpolation { bspline3, nearest };

/// Percentile with linear interpolation between order statistics
/// (position p/100 * (n-1) in the sorted sample).
double percentile(std::span<const double> values, double p);
/// Same, on data that is already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double p);

/// Clamp above the configured percentile of all voxels, then map
/// [min, clipped max] affinely onto [0, rescale_max]. Constant images become 0.
VoxelGrid clip_and_rescale(const VoxelGrid& image, const PreprocessConfig& cfg);

/// Output dims = ceil(dim * spacing / target). Output voxel j sits at
/// origin + j * target (origins coincide). Points past the last input sample
/// use mirror boundary conditions.
VoxelGrid resample(const VoxelGrid& image, const Vec3& target_spacing_mm,
                   Interpolation interpolation = Interpolation::bspline3);
LabelGrid resample_labels(const LabelGrid& labels, const Vec3& target_spacing_mm);

/// Geometry that resample() produces for a given source geometry.
Geometry resampled_geometry(const Geometry& source, const Vec3& target_spacing_mm);

/// Cubic B-spline interpolation coefficients along one line, mirror boundaries.
/// Exposed for testing against a direct linear solve.
void bspline_prefilter(std::span<double> line);
/// Cubic B-spline basis weight at offset t (|t| < 2).
double bspline3(double t);

/// Voxels of one region of interest after intensity discretization.
struct DiscretizedRoi {
  std::vector<int> levels;           ///< 1..gray_levels per voxel
  std::vector<Index3> coords;        ///< voxel indices, same order as levels
  std::vector<double> intensities;   ///< values before discretization
  Vec3 spacing_mm{1.0, 1.0, 1.0};
  int gray_levels = 1;

  std::size_t size() const { return levels.size(); }
};

/// Fixed-bin-width discretization anchored at the ROI minimum:
/// level = floor((I - min) / bin_width) + 1.
DiscretizedRoi discretize(const VoxelGrid& image, std::span<const Index3> roi, double bin_width);

/// Discretize raw values directly; returns per-value levels and sets gray_levels.
std::vector<int> discretize_values(std::span<const double> values, double bin_width, int& gray_levels);

}  // namespace utrad::prep
