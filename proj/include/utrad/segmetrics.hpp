#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "utrad/common/interval.hpp"
#include "utrad/volume/grid.hpp"

namespace utrad::seg {

/// Binary mask; any nonzero value is foreground.
using BinaryGrid = Grid<std::uint8_t>;

/// 2|A∩B| / (|A|+|B|) over masks of equal length; both empty gives 1.
double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
/// Dice between the voxels labeled `la` in `a` and `lb` in `b`. A label of 0
/// selects every nonzero voxel.
double dice(const LabelGrid& a, std::uint16_t la, const LabelGrid& b, std::uint16_t lb);

BinaryGrid foreground(const LabelGrid& labels);

struct Components {
  LabelGrid labels;   ///< 0 background, 1..count in first-voxel scan order
  std::size_t count = 0;
  std::vector<std::size_t> sizes;  ///< sizes[c - 1] voxels in component c
};

/// 26-connected components of the foreground.
Components connected_components(const BinaryGrid& mask);

struct InstanceMatch {
  std::uint16_t manual_label = 0;
  std::optional<std::uint16_t> predicted_component;
  double dsc = 0.0;
};

struct CrossMatch {
  Components predicted;
  std::vector<InstanceMatch> matches;  ///< ascending manual label
};

/// Pairs every manual instance with the predicted component of highest Dice
/// (lowest component id on ties). Several instances may share a component.
CrossMatch cross_match(const LabelGrid& manual, const BinaryGrid& predicted);

struct CaseScore {
  std::string case_id;
  double dsc = 0.0;
};

struct AgreementReport {
  std::vector<CaseScore> per_case;
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Mean and truncated normal interval; needs at least two cases.
AgreementReport summarize(std::vector<CaseScore> per_case);

}  // namespace utrad::seg
