#pragma once

#include <vector>

#include "utrad/common/rng.hpp"
#include "utrad/preprocess.hpp"

namespace support {

// Random ROI inside an nx*ny*nz box: each voxel kept with probability
// `density` (at least one kept), intensities uniform in [0, 255) so that a
// bin width of `bin_width` yields several gray levels.
inline utrad::prep::DiscretizedRoi random_roi(utrad::Rng& rng, std::int64_t nx, std::int64_t ny, std::int64_t nz,
                                              double density, double bin_width = 50.0) {
  std::vector<utrad::Index3> coords;
  std::vector<double> values;
  for (std::int64_t z = 0; z < nz; ++z) {
    for (std::int64_t y = 0; y < ny; ++y) {
      for (std::int64_t x = 0; x < nx; ++x) {
        if (rng.uniform01() < density) {
          coords.push_back({x, y, z});
          values.push_back(rng.uniform(0.0, 255.0));
        }
      }
    }
  }
  if (coords.empty()) {
    coords.push_back({0, 0, 0});
    values.push_back(rng.uniform(0.0, 255.0));
  }
  utrad::prep::DiscretizedRoi roi;
  roi.coords = std::move(coords);
  roi.intensities = std::move(values);
  roi.levels = utrad::prep::discretize_values(roi.intensities, bin_width, roi.gray_levels);
  return roi;
}

inline utrad::prep::DiscretizedRoi roi_from(std::vector<utrad::Index3> coords, std::vector<int> levels) {
  utrad::prep::DiscretizedRoi roi;
  roi.coords = std::move(coords);
  roi.levels = std::move(levels);
  for (int g : roi.levels) {
    roi.intensities.push_back(static_cast<double>(g));
    roi.gray_levels = std::max(roi.gray_levels, g);
  }
  return roi;
}

}  // namespace support
