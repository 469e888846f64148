#pragma once

#include <array>
#include <span>
#include <vector>

#include "utrad/volume/grid.hpp"

namespace utrad::radiomics {

struct Triangle {
  std::array<Vec3, 3> vertices;
};

/// Iso-surface at level 0.5 of a binary voxel set, vertices in millimetres
/// relative to the per-axis minimum voxel of the ROI. Triangles are oriented with
/// outward normals and the surface is closed.
std::vector<Triangle> marching_cubes(std::span<const Index3> roi, const Vec3& spacing_mm);

struct MeshMeasures {
  double volume_mm3 = 0.0;
  double area_mm2 = 0.0;
};

MeshMeasures measure(std::span<const Triangle> mesh);

}  // namespace utrad::radiomics
