#include "utrad/radiomics/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

namespace utrad::radiomics {

namespace {

// Cube corner c has offsets (c & 1, (c >> 1) & 1, (c >> 2) & 1).
constexpr std::array<std::array<int, 4>, 6> kFaces{{
    {0, 4, 6, 2},  // x = 0
    {1, 3, 7, 5},  // x = 1
    {0, 1, 5, 4},  // y = 0
    {2, 6, 7, 3},  // y = 1
    {0, 2, 3, 1},  // z = 0
    {4, 5, 7, 6},  // z = 1
}};  // corners counter-clockwise seen from outside the cube

struct Edge {
  int a;
  int b;
};

constexpr std::array<Edge, 12> kEdges{{
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // along x
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // along y
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // along z
}};

int edge_id(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdges[e].a == a && kEdges[e].b == b) || (kEdges[e].a == b && kEdges[e].b == a)) return e;
  }
  return -1;
}

using Loop = std::vector<int>;
using LoopList = std::vector<Loop>;

// Surface loops of one corner configuration, as sequences of crossed edges,
// generated by walking the cube faces. On each face the surface segment runs
// from the crossing where the boundary leaves the inside to the preceding
// crossing where it entered, so diagonal (ambiguous) faces always separate
// their inside corners. Adjacent cubes therefore agree on shared faces and
// the mesh is closed. Loops wind with inward normals.
LoopList surface_loops(int config) {
  const auto inside = [config](int corner) { return ((config >> corner) & 1) != 0; };
  std::array<int, 12> next;
  next.fill(-1);
  for (const auto& face : kFaces) {
    std::array<int, 4> crossing_edge{};
    std::array<bool, 4> leaving{};
    int count = 0;
    for (int k = 0; k < 4; ++k) {
      const int a = face[k];
      const int b = face[(k + 1) % 4];
      if (inside(a) == inside(b)) continue;
      crossing_edge[count] = edge_id(a, b);
      leaving[count] = inside(a);
      ++count;
    }
    for (int i = 0; i < count; ++i) {
      if (!leaving[i]) continue;
      const int prev = (i + count - 1) % count;
      next[crossing_edge[i]] = crossing_edge[prev];
    }
  }
  LoopList loops;
  std::array<bool, 12> used{};
  for (int start = 0; start < 12; ++start) {
    if (next[start] < 0 || used[start]) continue;
    Loop loop;
    for (int e = start; !used[e]; e = next[e]) {
      used[e] = true;
      loop.push_back(e);
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

const std::array<LoopList, 256>& table() {
  static const auto t = [] {
    std::array<LoopList, 256> out;
    for (int c = 0; c < 256; ++c) out[c] = surface_loops(c);
    return out;
  }();
  return t;
}

struct KeyHash {
  std::size_t operator()(const Index3& p) const {
    std::size_t h = static_cast<std::size_t>(p[0]) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::size_t>(p[1]) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(p[2]) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace

std::vector<Triangle> marching_cubes(std::span<const Index3> roi, const Vec3& spacing) {
  std::vector<Triangle> mesh;
  if (roi.empty()) return mesh;
  std::unordered_set<Index3, KeyHash> voxels(roi.begin(), roi.end());
  // Each cube is named by its lowest corner; a cube touches the ROI iff one
  // of its corners is an ROI voxel.
  std::vector<Index3> cubes;
  {
    std::unordered_set<Index3, KeyHash> seen;
    for (const auto& p : roi) {
      for (int c = 0; c < 8; ++c) {
        const Index3 q{p[0] - (c & 1), p[1] - ((c >> 1) & 1), p[2] - ((c >> 2) & 1)};
        if (seen.insert(q).second) cubes.push_back(q);
      }
    }
    std::sort(cubes.begin(), cubes.end());
  }
  // Coordinates relative to the ROI's lowest corner keep the mesh exactly
  // translation invariant.
  Index3 low = roi.front();
  for (const auto& p : roi) {
    for (int a = 0; a < 3; ++a) low[a] = std::min(low[a], p[a]);
  }
  const auto& loops = table();
  std::vector<Vec3> points;
  for (const auto& base : cubes) {
    int config = 0;
    for (int c = 0; c < 8; ++c) {
      const Index3 q{base[0] + (c & 1), base[1] + ((c >> 1) & 1), base[2] + ((c >> 2) & 1)};
      if (voxels.count(q)) config |= 1 << c;
    }
    for (const auto& loop : loops[config]) {
      points.clear();
      for (int edge : loop) {
        const Edge& e = kEdges[edge];
        Vec3 v{};
        for (int a = 0; a < 3; ++a) {
          const double pa = static_cast<double>(base[a] - low[a] + ((e.a >> a) & 1));
          const double pb = static_cast<double>(base[a] - low[a] + ((e.b >> a) & 1));
          v[a] = 0.5 * (pa + pb) * spacing[a];
        }
        points.push_back(v);
      }
      // Triangles are emitted reversed so normals point outward. Longer
      // loops may be non-planar; fanning from their centroid keeps the
      // result independent of where the loop starts, hence of axis order.
      if (points.size() == 3) {
        mesh.push_back({{points[0], points[2], points[1]}});
        continue;
      }
      Vec3 center{0.0, 0.0, 0.0};
      for (const auto& p : points) {
        for (int a = 0; a < 3; ++a) center[a] += p[a] / static_cast<double>(points.size());
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        mesh.push_back({{center, points[(i + 1) % points.size()], points[i]}});
      }
    }
  }
  return mesh;
}

MeshMeasures measure(std::span<const Triangle> mesh) {
  MeshMeasures m;
  if (mesh.empty()) return m;
  const Vec3 ref = mesh.front().vertices[0];
  double six_volume = 0.0;
  double twice_area = 0.0;
  for (const auto& t : mesh) {
    Vec3 a{}, b{}, c{};
    for (int k = 0; k < 3; ++k) {
      a[k] = t.vertices[0][k] - ref[k];
      b[k] = t.vertices[1][k] - ref[k];
      c[k] = t.vertices[2][k] - ref[k];
    }
    const Vec3 bc{b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]};
    six_volume += a[0] * bc[0] + a[1] * bc[1] + a[2] * bc[2];
    const Vec3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const Vec3 w{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const Vec3 n{u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]};
    twice_area += std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  }
  m.volume_mm3 = six_volume / 6.0;
  m.area_mm2 = twice_area / 2.0;
  return m;
}

}  // namespace utrad::radiomics
