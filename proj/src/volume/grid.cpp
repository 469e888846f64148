#include <cmath>

#include "utrad/volume/grid.hpp"
#include "utrad/volume/merge.hpp"

namespace utrad {

bool Geometry::matches(const Geometry& other, double tol) const {
  if (dims != other.dims) return false;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(spacing_mm[a] - other.spacing_mm[a]) > tol) return false;
    if (std::abs(origin_mm[a] - other.origin_mm[a]) > tol) return false;
  }
  return true;
}

void Geometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] == 0) throw PreconditionError("grid dimension must be positive");
    if (!(spacing_mm[a] > 0.0) || !std::isfinite(spacing_mm[a])) {
      throw PreconditionError("grid spacing must be strictly positive");
    }
  }
}

LabelGrid merge_uterus_and_tumor(const LabelGrid& uterus, const LabelGrid& tumors) {
  if (!uterus.geometry.matches(tumors.geometry)) {
    throw PreconditionError("uterus and tumor masks have different geometry");
  }
  LabelGrid merged(uterus.geometry, std::uint16_t{0});
  for (std::size_t i = 0; i < merged.data.size(); ++i) {
    if (tumors.data[i] > 0) {
      merged.data[i] = 2;
    } else if (uterus.data[i] > 0) {
      merged.data[i] = 1;
    }
  }
  return merged;
}

}  // namespace utrad
