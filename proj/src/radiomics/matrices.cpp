#include "utrad/radiomics/matrices.hpp"

#include <algorithm>
#include <numeric>

namespace utrad::radiomics {

double CountMatrix::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

namespace {

// Bounding-box lookup of levels with a one-voxel border of zeros, so every
// 26-neighbor of an ROI voxel is addressable without bounds checks.
class LevelVolume {
 public:
  explicit LevelVolume(const prep::DiscretizedRoi& roi) {
    Index3 lo = roi.coords.front();
    Index3 hi = lo;
    for (const auto& p : roi.coords) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    for (int a = 0; a < 3; ++a) {
      origin_[a] = lo[a] - 1;
      dims_[a] = hi[a] - lo[a] + 3;
    }
    levels_.assign(static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]), 0);
    for (std::size_t i = 0; i < roi.size(); ++i) levels_[index(roi.coords[i])] = roi.levels[i];
  }

  std::size_t index(const Index3& p) const {
    return static_cast<std::size_t>((p[0] - origin_[0]) +
                                    dims_[0] * ((p[1] - origin_[1]) + dims_[1] * (p[2] - origin_[2])));
  }
  std::int64_t offset(const Index3& d) const { return d[0] + dims_[0] * (d[1] + dims_[1] * d[2]); }
  int at(std::size_t i) const { return levels_[i]; }
  std::size_t size() const { return levels_.size(); }
  /// Level at p, or 0 if p lies outside the padded box.
  int level(const Index3& p) const {
    for (int a = 0; a < 3; ++a) {
      if (p[a] < origin_[a] || p[a] >= origin_[a] + dims_[a]) return 0;
    }
    return levels_[index(p)];
  }

 private:
  Index3 origin_{};
  Index3 dims_{};
  std::vector<int> levels_;
};

std::vector<std::int64_t> neighbor_offsets(const LevelVolume& vol) {
  std::vector<std::int64_t> out;
  for (std::int64_t dz = -1; dz <= 1; ++dz) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        if (dx || dy || dz) out.push_back(vol.offset({dx, dy, dz}));
      }
    }
  }
  return out;
}

// Trims trailing all-zero columns, keeping at least one.
CountMatrix trim_columns(const CountMatrix& m) {
  std::size_t used = 1;
  for (std::size_t c = 0; c < m.cols; ++c) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (m(r, c) != 0.0) used = std::max(used, c + 1);
    }
  }
  CountMatrix out(m.rows, used);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < used; ++c) out(r, c) = m(r, c);
  }
  return out;
}

}  // namespace

GrayLevelMatrices compute_matrices(const prep::DiscretizedRoi& roi) {
  if (roi.size() == 0) throw PreconditionError("cannot build texture matrices for an empty ROI");
  const auto ng = static_cast<std::size_t>(roi.gray_levels);
  const std::size_t n = roi.size();
  const LevelVolume vol(roi);

  GrayLevelMatrices m;
  m.gray_levels = roi.gray_levels;
  m.voxel_count = n;

  std::vector<std::size_t> at(n);
  for (std::size_t i = 0; i < n; ++i) at[i] = vol.index(roi.coords[i]);

  // GLCM and GLRLM, per direction. Runs are collected first so the GLRLM
  // width is the longest run over all directions.
  std::array<std::vector<std::pair<int, std::size_t>>, 13> runs;
  std::size_t longest = 1;
  for (std::size_t d = 0; d < kDirections.size(); ++d) {
    const auto step = vol.offset(kDirections[d]);
    CountMatrix glcm(ng, ng);
    for (std::size_t i = 0; i < n; ++i) {
      const int g = roi.levels[i];
      const auto here = static_cast<std::int64_t>(at[i]);
      const int fwd = vol.at(static_cast<std::size_t>(here + step));
      if (fwd > 0) {
        glcm(g - 1, fwd - 1) += 1.0;
        glcm(fwd - 1, g - 1) += 1.0;
      }
      // A run starts where the predecessor is outside the ROI or differs.
      if (vol.at(static_cast<std::size_t>(here - step)) == g) continue;
      std::size_t length = 1;
      auto pos = here + step;
      while (vol.at(static_cast<std::size_t>(pos)) == g) {
        ++length;
        pos += step;
      }
      runs[d].emplace_back(g, length);
      longest = std::max(longest, length);
    }
    m.glcm[d] = std::move(glcm);
  }
  for (std::size_t d = 0; d < kDirections.size(); ++d) {
    CountMatrix glrlm(ng, longest);
    for (const auto& [g, length] : runs[d]) glrlm(g - 1, length - 1) += 1.0;
    m.glrlm[d] = std::move(glrlm);
  }

  const auto neighbors = neighbor_offsets(vol);

  // GLSZM: 26-connected zones of equal level.
  {
    std::vector<std::pair<int, std::size_t>> found;
    std::size_t largest = 1;
    std::vector<char> seen(n, 0);
    std::vector<std::int64_t> roi_index_of(vol.size(), -1);
    for (std::size_t i = 0; i < n; ++i) roi_index_of[at[i]] = static_cast<std::int64_t>(i);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
      if (seen[i]) continue;
      const int g = roi.levels[i];
      std::size_t size = 0;
      stack.push_back(i);
      seen[i] = 1;
      while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        ++size;
        for (auto off : neighbors) {
          const auto q = static_cast<std::size_t>(static_cast<std::int64_t>(at[v]) + off);
          if (vol.at(q) != g) continue;
          const auto j = roi_index_of[q];
          if (j < 0 || seen[static_cast<std::size_t>(j)]) continue;
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(static_cast<std::size_t>(j));
        }
      }
      found.emplace_back(g, size);
      largest = std::max(largest, size);
    }
    CountMatrix zones(ng, largest);
    for (const auto& [g, size] : found) zones(g - 1, size - 1) += 1.0;
    m.glszm = std::move(zones);
  }

  // GLDM (alpha = 0) and NGTDM share the neighborhood scan.
  {
    CountMatrix dependence(ng, neighbors.size() + 1);
    m.ngtdm.assign(ng, NgtdmRow{});
    for (std::size_t i = 0; i < n; ++i) {
      const int g = roi.levels[i];
      std::size_t same = 0;
      std::size_t inside = 0;
      double neighbor_sum = 0.0;
      for (auto off : neighbors) {
        const int h = vol.at(static_cast<std::size_t>(static_cast<std::int64_t>(at[i]) + off));
        if (h == 0) continue;
        ++inside;
        neighbor_sum += h;
        if (h == g) ++same;
      }
      dependence(g - 1, same) += 1.0;
      if (inside > 0) {
        auto& row = m.ngtdm[g - 1];
        row.count += 1.0;
        row.difference += std::abs(g - neighbor_sum / static_cast<double>(inside));
      }
    }
    m.gldm = trim_columns(dependence);
  }
  return m;
}

}  // namespace utrad::radiomics
