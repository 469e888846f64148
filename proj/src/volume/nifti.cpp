#include "utrad/volume/nifti.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

namespace utrad::nifti {

static_assert(std::endian::native == std::endian::little,
              "NIfTI I/O assumes a little-endian host");

namespace {

// Byte offsets of the NIfTI-1 header fields used here.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace off

template <typename T>
T load(const std::vector<unsigned char>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void store(std::vector<unsigned char>& bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  // gzread passes uncompressed files through unchanged.
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (!file) throw InputError("cannot open NIfTI file: " + path.string());
  std::vector<unsigned char> bytes;
  std::array<unsigned char, 1 << 16> chunk{};
  for (;;) {
    const int n = gzread(file, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      gzclose(file);
      throw InputError("corrupt compressed NIfTI file: " + path.string());
    }
    if (n == 0) break;
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(file);
  return bytes;
}

std::size_t element_size(DataType t) {
  switch (t) {
    case DataType::uint8: return 1;
    case DataType::int16:
    case DataType::uint16: return 2;
    case DataType::int32:
    case DataType::float32: return 4;
    case DataType::float64: return 8;
  }
  return 0;
}

bool is_integer(DataType t) {
  return t == DataType::uint8 || t == DataType::int16 || t == DataType::uint16 ||
         t == DataType::int32;
}

DataType parse_datatype(std::int16_t code) {
  switch (code) {
    case 2: return DataType::uint8;
    case 4: return DataType::int16;
    case 8: return DataType::int32;
    case 16: return DataType::float32;
    case 64: return DataType::float64;
    case 512: return DataType::uint16;
    default: throw InputError("unsupported NIfTI datatype code " + std::to_string(code));
  }
}

double element(const unsigned char* p, DataType t) {
  switch (t) {
    case DataType::uint8: return *p;
    case DataType::int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case DataType::uint16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case DataType::int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case DataType::float32: { float v; std::memcpy(&v, p, 4); return v; }
    case DataType::float64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

// Rejects rotations that are not a signed permutation of the voxel axes.
void require_axis_aligned(const std::array<std::array<double, 3>, 3>& columns, const char* which) {
  for (const auto& col : columns) {
    const double norm = std::sqrt(col[0] * col[0] + col[1] * col[1] + col[2] * col[2]);
    if (norm <= 0.0) throw InputError(std::string("degenerate ") + which + " matrix");
    int nonzero = 0;
    for (double v : col) {
      if (std::abs(v) > 1e-6 * norm) ++nonzero;
    }
    if (nonzero != 1) {
      throw InputError(std::string("oblique ") + which + " orientation is not supported");
    }
  }
}

struct Decoded {
  Geometry geometry;
  DataType type;
  double slope;
  double inter;
  const unsigned char* payload;
};

Decoded decode(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  const std::string where = " (" + path.string() + ")";
  if (bytes.size() < header_size) throw InputError("truncated NIfTI header" + where);
  if (load<std::int32_t>(bytes, off::sizeof_hdr) != static_cast<std::int32_t>(header_size)) {
    throw InputError("not a little-endian NIfTI-1 header" + where);
  }
  if (std::memcmp(bytes.data() + off::magic, "n+1\0", 4) != 0) {
    throw InputError("unsupported NIfTI format: expected single-file magic \"n+1\"" + where);
  }
  const auto ndim = load<std::int16_t>(bytes, off::dim);
  if (ndim != 3) {
    throw InputError("unsupported NIfTI dimensionality " + std::to_string(ndim) + where);
  }
  Decoded d{};
  for (int a = 0; a < 3; ++a) {
    const auto n = load<std::int16_t>(bytes, off::dim + 2 * (a + 1));
    if (n <= 0) throw InputError("nonpositive NIfTI dimension" + where);
    d.geometry.dims[a] = static_cast<std::size_t>(n);
    d.geometry.spacing_mm[a] = std::abs(load<float>(bytes, off::pixdim + 4 * (a + 1)));
    if (!(d.geometry.spacing_mm[a] > 0.0)) throw InputError("nonpositive voxel spacing" + where);
  }
  d.type = parse_datatype(load<std::int16_t>(bytes, off::datatype));
  d.slope = load<float>(bytes, off::scl_slope);
  d.inter = load<float>(bytes, off::scl_inter);
  if (!std::isfinite(d.slope)) d.slope = 0.0;
  if (!std::isfinite(d.inter)) d.inter = 0.0;

  const auto sform = load<std::int16_t>(bytes, off::sform_code);
  const auto qform = load<std::int16_t>(bytes, off::qform_code);
  if (sform > 0) {
    std::array<std::array<double, 3>, 3> columns{};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        const double v = load<float>(bytes, off::srow_x + 16 * r + 4 * c);
        if (c < 3) columns[c][r] = v; else d.geometry.origin_mm[r] = v;
      }
    }
    require_axis_aligned(columns, "sform");
  } else if (qform > 0) {
    const double b = load<float>(bytes, off::quatern_b);
    const double c = load<float>(bytes, off::quatern_b + 4);
    const double dq = load<float>(bytes, off::quatern_b + 8);
    const double a = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + dq * dq)));
    const std::array<std::array<double, 3>, 3> columns{{
        {a * a + b * b - c * c - dq * dq, 2 * (b * c + a * dq), 2 * (b * dq - a * c)},
        {2 * (b * c - a * dq), a * a + c * c - b * b - dq * dq, 2 * (c * dq + a * b)},
        {2 * (b * dq + a * c), 2 * (c * dq - a * b), a * a + dq * dq - c * c - b * b},
    }};
    require_axis_aligned(columns, "qform");
    for (int r = 0; r < 3; ++r) d.geometry.origin_mm[r] = load<float>(bytes, off::qoffset_x + 4 * r);
  }

  const double vox_offset = load<float>(bytes, off::vox_offset);
  const auto offset = static_cast<std::size_t>(vox_offset < static_cast<double>(header_size) ? data_offset
                                                                                          : vox_offset);
  const std::size_t need = d.geometry.voxel_count() * element_size(d.type);
  if (bytes.size() < offset + need) throw InputError("truncated NIfTI payload" + where);
  d.payload = bytes.data() + offset;
  return d;
}

std::vector<unsigned char> encode_header(const Geometry& g, DataType type) {
  g.validate();
  for (auto n : g.dims) {
    if (n > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max())) {
      throw PreconditionError("grid dimension exceeds NIfTI-1 limit");
    }
  }
  std::vector<unsigned char> bytes(data_offset, 0);
  store<std::int32_t>(bytes, off::sizeof_hdr, static_cast<std::int32_t>(header_size));
  store<std::int16_t>(bytes, off::dim, 3);
  for (int a = 0; a < 3; ++a) {
    store<std::int16_t>(bytes, off::dim + 2 * (a + 1), static_cast<std::int16_t>(g.dims[a]));
    store<float>(bytes, off::pixdim + 4 * (a + 1), static_cast<float>(g.spacing_mm[a]));
  }
  for (int a = 4; a < 8; ++a) store<std::int16_t>(bytes, off::dim + 2 * a, 1);
  store<float>(bytes, off::pixdim, 1.0f);
  store<std::int16_t>(bytes, off::datatype, static_cast<std::int16_t>(type));
  store<std::int16_t>(bytes, off::bitpix, static_cast<std::int16_t>(8 * element_size(type)));
  store<float>(bytes, off::vox_offset, static_cast<float>(data_offset));
  store<float>(bytes, off::scl_slope, 0.0f);
  store<float>(bytes, off::scl_inter, 0.0f);
  bytes[off::xyzt_units] = 2;  // millimetres
  const char descrip[] = "utrad";
  std::memcpy(bytes.data() + off::descrip, descrip, sizeof(descrip));
  store<std::int16_t>(bytes, off::qform_code, 1);
  store<std::int16_t>(bytes, off::sform_code, 1);
  for (int r = 0; r < 3; ++r) {
    store<float>(bytes, off::qoffset_x + 4 * r, static_cast<float>(g.origin_mm[r]));
    for (int c = 0; c < 3; ++c) {
      store<float>(bytes, off::srow_x + 16 * r + 4 * c, r == c ? static_cast<float>(g.spacing_mm[r]) : 0.0f);
    }
    store<float>(bytes, off::srow_x + 16 * r + 12, static_cast<float>(g.origin_mm[r]));
  }
  std::memcpy(bytes.data() + off::magic, "n+1\0", 4);
  return bytes;
}

void put(std::vector<unsigned char>& bytes, double v, DataType t) {
  const auto append = [&bytes](const auto& x) {
    const auto* p = reinterpret_cast<const unsigned char*>(&x);
    bytes.insert(bytes.end(), p, p + sizeof(x));
  };
  switch (t) {
    case DataType::uint8: append(static_cast<std::uint8_t>(v)); break;
    case DataType::int16: append(static_cast<std::int16_t>(v)); break;
    case DataType::uint16: append(static_cast<std::uint16_t>(v)); break;
    case DataType::int32: append(static_cast<std::int32_t>(v)); break;
    case DataType::float32: append(static_cast<float>(v)); break;
    case DataType::float64: append(v); break;
  }
}

void flush(const std::vector<unsigned char>& bytes, const std::filesystem::path& path, bool gzip) {
  const std::string mode = gzip ? "wb6" : "wb0T";
  gzFile file = gzopen(path.string().c_str(), mode.c_str());
  if (!file) throw InputError("cannot write NIfTI file: " + path.string());
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - written, 1u << 30));
    if (gzwrite(file, bytes.data() + written, chunk) != static_cast<int>(chunk)) {
      gzclose(file);
      throw InputError("failed writing NIfTI file: " + path.string());
    }
    written += chunk;
  }
  if (gzclose(file) != Z_OK) throw InputError("failed closing NIfTI file: " + path.string());
}

}  // namespace

bool is_gzip_path(const std::filesystem::path& path) { return path.extension() == ".gz"; }

std::variant<VoxelGrid, LabelGrid> read(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const Decoded d = decode(bytes, path);
  const std::size_t n = d.geometry.voxel_count();
  const std::size_t step = element_size(d.type);
  const bool identity_scale = d.slope == 0.0 || (d.slope == 1.0 && d.inter == 0.0);

  if (is_integer(d.type) && identity_scale) {
    bool fits = true;
    std::vector<std::uint16_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = element(d.payload + i * step, d.type);
      if (v < 0.0 || v > 65535.0) {
        fits = false;
        break;
      }
      labels[i] = static_cast<std::uint16_t>(v);
    }
    if (fits) return LabelGrid(d.geometry, std::move(labels));
  }

  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = element(d.payload + i * step, d.type);
    values[i] = d.slope != 0.0 ? raw * d.slope + d.inter : raw;
  }
  return VoxelGrid(d.geometry, std::move(values));
}

VoxelGrid read_image(const std::filesystem::path& path) {
  auto loaded = read(path);
  if (auto* image = std::get_if<VoxelGrid>(&loaded)) return std::move(*image);
  const auto& labels = std::get<LabelGrid>(loaded);
  return VoxelGrid(labels.geometry, std::vector<double>(labels.data.begin(), labels.data.end()));
}

LabelGrid read_labels(const std::filesystem::path& path) {
  auto loaded = read(path);
  if (auto* labels = std::get_if<LabelGrid>(&loaded)) return std::move(*labels);
  const auto& image = std::get<VoxelGrid>(loaded);
  std::vector<std::uint16_t> out(image.data.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = image.data[i];
    if (v < 0.0 || v > 65535.0 || v != std::floor(v)) {
      throw InputError("label volume holds non-integer or out-of-range values: " + path.string());
    }
    out[i] = static_cast<std::uint16_t>(v);
  }
  return LabelGrid(image.geometry, std::move(out));
}

void write(const VoxelGrid& grid, const std::filesystem::path& path, bool gzip, DataType type) {
  auto bytes = encode_header(grid.geometry, type);
  bytes.reserve(bytes.size() + grid.data.size() * element_size(type));
  for (double v : grid.data) put(bytes, v, type);
  flush(bytes, path, gzip);
}

void write(const LabelGrid& grid, const std::filesystem::path& path, bool gzip) {
  auto bytes = encode_header(grid.geometry, DataType::uint16);
  bytes.reserve(bytes.size() + grid.data.size() * 2);
  for (auto v : grid.data) put(bytes, v, DataType::uint16);
  flush(bytes, path, gzip);
}

}  // namespace utrad::nifti
