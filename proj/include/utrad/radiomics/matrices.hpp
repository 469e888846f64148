#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "utrad/preprocess.hpp"

namespace utrad::radiomics {

/// The 13 unique distance-1 offsets of a 26-neighborhood; the opposite
/// offsets are covered by symmetrization (GLCM) or run direction (GLRLM).
inline constexpr std::array<Index3, 13> kDirections{{
    {1, 0, 0},  {0, 1, 0},  {0, 0, 1},   {1, 1, 0},  {1, -1, 0},  {1, 0, 1},  {1, 0, -1},
    {0, 1, 1},  {0, 1, -1}, {1, 1, 1},   {1, 1, -1}, {1, -1, 1},  {1, -1, -1},
}};

/// Row-major dense matrix of counts. Counts are whole numbers stored as doubles.
struct CountMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  CountMatrix() = default;
  CountMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double total() const;
  bool operator==(const CountMatrix&) const = default;
};

/// Neighboring gray-tone difference summary for one gray level.
struct NgtdmRow {
  double count = 0.0;      ///< voxels of this level with at least one ROI neighbor
  double difference = 0.0; ///< sum of |level - mean neighbor level| over those voxels

  bool operator==(const NgtdmRow&) const = default;
};

/// All texture matrices of one ROI. Row r corresponds to gray level r + 1;
/// GLRLM/GLSZM/GLDM column c corresponds to run length, zone size or
/// dependence c + 1.
struct GrayLevelMatrices {
  int gray_levels = 1;
  std::size_t voxel_count = 0;
  std::array<CountMatrix, 13> glcm;   ///< symmetrized, per direction
  std::array<CountMatrix, 13> glrlm;  ///< per direction
  CountMatrix glszm;
  CountMatrix gldm;
  std::vector<NgtdmRow> ngtdm;

  bool operator==(const GrayLevelMatrices&) const = default;
};

/// Builds all five matrix families. Neighbors outside the ROI never count;
/// zones and dependence use the 26-neighborhood with alpha = 0.
GrayLevelMatrices compute_matrices(const prep::DiscretizedRoi& roi);

}  // namespace utrad::radiomics
