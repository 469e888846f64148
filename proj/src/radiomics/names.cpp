#include <cmath>
#include <string>

#include "utrad/radiomics/features.hpp"

namespace utrad::radiomics {

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    const std::array<std::vector<std::string_view>, 7> per_family{{
        {"MeshVolume", "VoxelVolume", "SurfaceArea", "SurfaceVolumeRatio", "Sphericity",
         "Maximum3DDiameter", "Maximum2DDiameterSlice", "Maximum2DDiameterColumn",
         "Maximum2DDiameterRow", "MajorAxisLength", "MinorAxisLength", "LeastAxisLength", "Elongation",
         "Flatness"},
        {"Energy", "TotalEnergy", "Entropy", "Minimum", "10Percentile", "90Percentile", "Maximum", "Mean",
         "Median", "InterquartileRange", "Range", "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation",
         "RootMeanSquared", "Skewness", "Kurtosis", "Variance", "Uniformity"},
        {"Autocorrelation", "JointAverage", "ClusterProminence", "ClusterShade", "ClusterTendency",
         "Contrast", "Correlation", "DifferenceAverage", "DifferenceEntropy", "DifferenceVariance",
         "JointEnergy", "JointEntropy", "Imc1", "Imc2", "Idm", "MCC", "Idmn", "Id", "Idn",
         "InverseVariance", "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares"},
        {"ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
         "RunLengthNonUniformity", "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance",
         "RunVariance", "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
         "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
         "LongRunHighGrayLevelEmphasis"},
        {"SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformity",
         "GrayLevelNonUniformityNormalized", "SizeZoneNonUniformity", "SizeZoneNonUniformityNormalized",
         "ZonePercentage", "GrayLevelVariance", "ZoneVariance", "ZoneEntropy", "LowGrayLevelZoneEmphasis",
         "HighGrayLevelZoneEmphasis", "SmallAreaLowGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis",
         "LargeAreaLowGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis"},
        {"SmallDependenceEmphasis", "LargeDependenceEmphasis", "GrayLevelNonUniformity",
         "DependenceNonUniformity", "DependenceNonUniformityNormalized", "GrayLevelVariance",
         "DependenceVariance", "DependenceEntropy", "LowGrayLevelEmphasis", "HighGrayLevelEmphasis",
         "SmallDependenceLowGrayLevelEmphasis", "SmallDependenceHighGrayLevelEmphasis",
         "LargeDependenceLowGrayLevelEmphasis", "LargeDependenceHighGrayLevelEmphasis"},
        {"Coarseness", "Contrast", "Busyness", "Complexity", "Strength"},
    }};
    std::vector<std::string> out;
    for (std::size_t f = 0; f < kFamilies.size(); ++f) {
      for (auto n : per_family[f]) out.push_back(std::string(kFamilies[f].name) + "_" + std::string(n));
    }
    return out;
  }();
  return names;
}

double FeatureVector::operator[](std::string_view name) const {
  for (const auto& [n, v] : entries) {
    if (n == name) return v;
  }
  throw InputError("unknown feature: " + std::string(name));
}

std::vector<double> FeatureVector::values() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.second);
  return out;
}

void check_census(const FeatureVector& features) {
  const auto& names = feature_names();
  if (features.size() != kFeatureCount || names.size() != kFeatureCount) {
    throw Error("feature census failed: expected 107 features, got " + std::to_string(features.size()));
  }
  std::size_t i = 0;
  for (const auto& family : kFamilies) {
    const std::string prefix = std::string(family.name) + "_";
    for (std::size_t k = 0; k < family.count; ++k, ++i) {
      const auto& [name, value] = features.entries[i];
      if (name != names[i] || name.rfind(prefix, 0) != 0) {
        throw Error("feature census failed: unexpected feature " + name + " at position " + std::to_string(i));
      }
      if (!std::isfinite(value)) throw Error("feature census failed: non-finite value for " + name);
    }
  }
}

}  // namespace utrad::radiomics
