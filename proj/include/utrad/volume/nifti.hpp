#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>

#include "utrad/volume/grid.hpp"

namespace utrad::nifti {

/// On-disk element types understood by the reader and writer.
enum class DataType : std::int16_t {
  uint8 = 2,
  int16 = 4,
  int32 = 8,
  float32 = 16,
  float64 = 64,
  uint16 = 512,
};

inline constexpr std::size_t header_size = 348;
inline constexpr std::size_t data_offset = 352;

/// Reads a NIfTI-1 single-file volume (.nii or .nii.gz). Integer files with
/// identity scaling and all values in [0, 65535] load as LabelGrid; everything
/// else loads as VoxelGrid with scl_slope/scl_inter applied.
std::variant<VoxelGrid, LabelGrid> read(const std::filesystem::path& path);

/// Reads and converts to intensities regardless of the stored type.
VoxelGrid read_image(const std::filesystem::path& path);

/// Reads a label volume; fails if values are not nonnegative integers < 65536.
LabelGrid read_labels(const std::filesystem::path& path);

/// Writes an intensity volume; float32 unless another type is requested.
/// Values are cast to the requested type without scaling.
void write(const VoxelGrid& grid, const std::filesystem::path& path, bool gzip,
           DataType type = DataType::float32);

/// Writes a label volume as uint16.
void write(const LabelGrid& grid, const std::filesystem::path& path, bool gzip);

/// True when the path ends with ".gz".
bool is_gzip_path(const std::filesystem::path& path);

}  // namespace utrad::nifti
