#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace utrad::ml {

struct FeatureRowKey {
  std::string patient_id;
  std::string image_id;
  std::uint16_t instance_label = 0;
  std::string instance_class;
  std::string source = "manual";  ///< manual or predicted
};

/// patient_id,image_id,instance_label,instance_class,source,<features...>
struct FeatureTable {
  std::vector<std::string> columns;  ///< feature names only
  std::vector<FeatureRowKey> keys;
  Eigen::MatrixXd values;            ///< rows x columns

  std::size_t rows() const { return keys.size(); }
  /// Subset of rows, same columns.
  FeatureTable select(const std::vector<std::size_t>& rows) const;
};

inline constexpr const char* kFeatureKeyColumns[] = {"patient_id", "image_id", "instance_label",
                                                     "instance_class", "source"};

std::string format_feature_table(const FeatureTable& table);
FeatureTable parse_feature_table(std::string_view text);
FeatureTable read_feature_table(const std::filesystem::path& path);

}  // namespace utrad::ml
