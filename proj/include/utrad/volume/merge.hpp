#pragma once

#include "utrad/volume/grid.hpp"

namespace utrad {

/// Two-class label volume: 2 where any tumor label is set, 1 for the remaining
/// uterus, 0 elsewhere. Geometries must match.
LabelGrid merge_uterus_and_tumor(const LabelGrid& uterus, const LabelGrid& tumors);

}  // namespace utrad
