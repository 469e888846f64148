#pragma once

#include <cstdint>
#include <vector>

#include "utrad/preprocess.hpp"
#include "utrad/radiomics/features.hpp"

namespace utrad::radiomics {

/// Image and label volume after clip/rescale and resampling to the target
/// spacing. Built once per case and shared by all of its instances.
struct PreparedCase {
  VoxelGrid image;
  LabelGrid labels;
  prep::PreprocessConfig config;
};

/// Runs clip -> rescale -> resample (B-spline image, nearest-neighbor labels).
PreparedCase prepare_case(const VoxelGrid& image, const LabelGrid& labels, const prep::PreprocessConfig& cfg);

/// Voxel indices carrying `label`, in scan order.
std::vector<Index3> label_voxels(const LabelGrid& labels, std::uint16_t label);

/// Features of one labeled instance of a prepared case. Throws InputError if
/// the label does not survive resampling.
FeatureVector extract_prepared(const PreparedCase& prepared, std::uint16_t label);

/// One-shot extraction: prepare then extract.
FeatureVector extract_instance(const VoxelGrid& image, const LabelGrid& mask, std::uint16_t label,
                               const prep::PreprocessConfig& cfg);

}  // namespace utrad::radiomics
