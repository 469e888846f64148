#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "utrad/common/error.hpp"

namespace utrad {

using Index3 = std::array<std::int64_t, 3>;
using Vec3 = std::array<double, 3>;

/// Physical layout shared by intensity and label volumes.
struct Geometry {
  std::array<std::size_t, 3> dims{1, 1, 1};
  Vec3 spacing_mm{1.0, 1.0, 1.0};
  Vec3 origin_mm{0.0, 0.0, 0.0};

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  double voxel_volume_mm3() const { return spacing_mm[0] * spacing_mm[1] * spacing_mm[2]; }

  /// Linear index with x varying fastest.
  std::size_t linear(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims[0] * (y + dims[1] * z);
  }
  Index3 unravel(std::size_t i) const {
    const auto x = i % dims[0];
    const auto y = (i / dims[0]) % dims[1];
    const auto z = i / (dims[0] * dims[1]);
    return {static_cast<std::int64_t>(x), static_cast<std::int64_t>(y), static_cast<std::int64_t>(z)};
  }
  bool contains(const Index3& p) const {
    return p[0] >= 0 && p[1] >= 0 && p[2] >= 0 && p[0] < static_cast<std::int64_t>(dims[0]) &&
           p[1] < static_cast<std::int64_t>(dims[1]) && p[2] < static_cast<std::int64_t>(dims[2]);
  }

  /// Same dims, and spacing/origin equal within `tol` mm.
  bool matches(const Geometry& other, double tol = 1e-6) const;

  /// Throws PreconditionError unless dims and spacing are strictly positive.
  void validate() const;

  bool operator==(const Geometry&) const = default;
};

/// Dense 3D array with geometry; x-fastest ordering.
template <typename T>
struct Grid {
  Geometry geometry;
  std::vector<T> data;

  Grid() = default;
  explicit Grid(Geometry g, T fill = T{}) : geometry(g), data(g.voxel_count(), fill) {}
  Grid(Geometry g, std::vector<T> values) : geometry(g), data(std::move(values)) {
    if (data.size() != geometry.voxel_count()) {
      throw PreconditionError("grid data length does not match dimensions");
    }
  }

  const std::array<std::size_t, 3>& dims() const { return geometry.dims; }
  T& at(std::size_t x, std::size_t y, std::size_t z) { return data[geometry.linear(x, y, z)]; }
  const T& at(std::size_t x, std::size_t y, std::size_t z) const {
    return data[geometry.linear(x, y, z)];
  }
  const T& at(const Index3& p) const {
    return data[geometry.linear(static_cast<std::size_t>(p[0]), static_cast<std::size_t>(p[1]),
                                static_cast<std::size_t>(p[2]))];
  }

  bool operator==(const Grid&) const = default;
};

/// Scalar intensities.
using VoxelGrid = Grid<double>;
/// Instance labels; 0 is background.
using LabelGrid = Grid<std::uint16_t>;

}  // namespace utrad
