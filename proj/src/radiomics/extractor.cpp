#include "utrad/radiomics/extractor.hpp"

#include <string>

#include "utrad/common/error.hpp"

namespace utrad::radiomics {

FeatureVector features_from_roi(const prep::DiscretizedRoi& roi) {
  if (roi.size() == 0) throw PreconditionError("empty ROI");
  const auto& s = roi.spacing_mm;
  const double voxel_volume = s[0] * s[1] * s[2];

  std::vector<double> values = shape_features(roi.coords, s);
  const auto first_order = first_order_features(roi.intensities, roi.levels, voxel_volume);
  values.insert(values.end(), first_order.begin(), first_order.end());
  const auto texture = texture_features(compute_matrices(roi));
  values.insert(values.end(), texture.begin(), texture.end());

  const auto& names = feature_names();
  if (values.size() != names.size()) {
    throw Error("feature census failed: computed " + std::to_string(values.size()) + " values");
  }
  FeatureVector out;
  out.entries.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) out.entries.emplace_back(names[i], values[i]);
  check_census(out);
  return out;
}

PreparedCase prepare_case(const VoxelGrid& image, const LabelGrid& labels, const prep::PreprocessConfig& cfg) {
  cfg.validate();
  if (!image.geometry.matches(labels.geometry)) {
    throw InputError("image and mask geometries differ");
  }
  const VoxelGrid rescaled = prep::clip_and_rescale(image, cfg);
  return PreparedCase{prep::resample(rescaled, cfg.target_spacing_mm, prep::Interpolation::bspline3),
                      prep::resample_labels(labels, cfg.target_spacing_mm), cfg};
}

std::vector<Index3> label_voxels(const LabelGrid& labels, std::uint16_t label) {
  std::vector<Index3> out;
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    if (labels.data[i] == label) out.push_back(labels.geometry.unravel(i));
  }
  return out;
}

FeatureVector extract_prepared(const PreparedCase& prepared, std::uint16_t label) {
  if (label == 0) throw InputError("label 0 is background");
  const auto roi = label_voxels(prepared.labels, label);
  if (roi.empty()) throw InputError("label " + std::to_string(label) + " absent from mask after resampling");
  return features_from_roi(prep::discretize(prepared.image, roi, prepared.config.bin_width));
}

FeatureVector extract_instance(const VoxelGrid& image, const LabelGrid& mask, std::uint16_t label,
                               const prep::PreprocessConfig& cfg) {
  if (label == 0) throw InputError("label 0 is background");
  if (label_voxels(mask, label).empty()) throw InputError("label " + std::to_string(label) + " absent from mask");
  return extract_prepared(prepare_case(image, mask, cfg), label);
}

}  // namespace utrad::radiomics
