#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "utrad/preprocess.hpp"
#include "utrad/radiomics/matrices.hpp"

namespace utrad::radiomics {

/// Feature families in canonical output order with their cardinalities.
struct Family {
  std::string_view name;
  std::size_t count;
};
inline constexpr std::array<Family, 7> kFamilies{{
    {"shape", 14}, {"firstorder", 18}, {"glcm", 24}, {"glrlm", 16},
    {"glszm", 16}, {"gldm", 14},       {"ngtdm", 5},
}};
inline constexpr std::size_t kFeatureCount = 107;

/// Version tag of the canonical name list shipped in resources/.
inline constexpr std::string_view kFeatureListVersion = "utrad-features-v1";

/// All 107 canonical names, "family_Feature", in output order.
const std::vector<std::string>& feature_names();

/// Ordered (name, value) record for one tumor instance.
struct FeatureVector {
  std::vector<std::pair<std::string, double>> entries;

  std::size_t size() const { return entries.size(); }
  /// Value by canonical name; throws InputError if absent.
  double operator[](std::string_view name) const;
  std::vector<double> values() const;
};

/// Throws Error unless the vector has exactly the canonical names in order,
/// the per-family cardinalities, and only finite values.
void check_census(const FeatureVector& features);

/// 14 shape descriptors of a binary ROI, in canonical order.
std::vector<double> shape_features(std::span<const Index3> roi, const Vec3& spacing_mm);

/// 18 first-order statistics. `levels` are the discretized gray levels of the
/// same voxels (used for Entropy and Uniformity).
std::vector<double> first_order_features(std::span<const double> intensities, std::span<const int> levels,
                                         double voxel_volume_mm3);

/// Convenience overload that discretizes with `bin_width` itself.
std::vector<double> first_order_features(std::span<const double> intensities, double bin_width,
                                         double voxel_volume_mm3);

/// 75 texture features in canonical order: 24 GLCM, 16 GLRLM, 16 GLSZM,
/// 14 GLDM, 5 NGTDM.
std::vector<double> texture_features(const GrayLevelMatrices& matrices);

std::vector<double> glcm_features(const GrayLevelMatrices& matrices);
std::vector<double> glrlm_features(const GrayLevelMatrices& matrices);
std::vector<double> glszm_features(const GrayLevelMatrices& matrices);
std::vector<double> gldm_features(const GrayLevelMatrices& matrices);
std::vector<double> ngtdm_features(const GrayLevelMatrices& matrices);

/// GLCM features of a single directional matrix (counts, any scale).
std::vector<double> glcm_direction_features(const CountMatrix& counts, int gray_levels);

/// Full record from an already preprocessed ROI: shape from the voxel set,
/// first-order from raw intensities, texture from the discretized levels.
FeatureVector features_from_roi(const prep::DiscretizedRoi& roi);

}  // namespace utrad::radiomics
