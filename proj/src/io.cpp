// Copyright 2026 The TumorCP Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tumorcp/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace tumorcp {
namespace fs = std::filesystem;

namespace {

constexpr std::int32_t kNiftiHeaderSize = 348;
constexpr std::int64_t kNiftiVoxOffset = 352;

enum class DType { kU8, kI8, kI16, kU16, kI32, kU32, kF32, kF64 };

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::kU8:
    case DType::kI8: return 1;
    case DType::kI16:
    case DType::kU16: return 2;
    case DType::kI32:
    case DType::kU32:
    case DType::kF32: return 4;
    case DType::kF64: return 8;
  }
  return 0;
}

// Decoded image before conversion to the engine's element types.
struct RawImage {
  Dims3 dims;
  Spacing spacing;
  std::array<double, 3> origin{0, 0, 0};
  DType dtype = DType::kF32;
  bool swap = false;  // payload endianness differs from host
  double slope = 1.0;
  double inter = 0.0;
  std::vector<unsigned char> payload;
};

[[noreturn]] void format_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::kFormatError, path.string() + ": " + what);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void require_exists(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec))
    throw Error(ErrorCode::kFileNotFound, "file not found: " + path.string());
}

// gzread passes plain files through unchanged, so this serves .nii and .nii.gz.
std::vector<unsigned char> read_all_maybe_gz(const fs::path& path) {
  require_exists(path);
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<unsigned char> out;
  std::vector<unsigned char> chunk(1 << 20);
  for (;;) {
    const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      gzclose(f);
      format_error(path, "corrupt compressed stream");
    }
    if (n == 0) break;
    out.insert(out.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(f);
  return out;
}

std::vector<unsigned char> read_all(const fs::path& path) {
  require_exists(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const fs::path& path, const std::vector<unsigned char>& bytes, bool gz) {
  if (gz) {
    gzFile f = gzopen(path.c_str(), "wb6");
    if (f == nullptr) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    std::size_t done = 0;
    while (done < bytes.size()) {
      const auto n = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
      if (gzwrite(f, bytes.data() + done, n) != static_cast<int>(n)) {
        gzclose(f);
        throw Error(ErrorCode::kIoError, "short write to " + path.string());
      }
      done += n;
    }
    if (gzclose(f) != Z_OK) throw Error(ErrorCode::kIoError, "cannot finish " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

template <typename T>
T load_scalar(const unsigned char* p, bool swap) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if (swap) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

template <typename T>
void store_le(std::vector<unsigned char>& out, std::size_t offset, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  std::memcpy(out.data() + offset, buf, sizeof(T));
}

DType nifti_dtype(std::int16_t code, const fs::path& path) {
  switch (code) {
    case 2: return DType::kU8;
    case 4: return DType::kI16;
    case 8: return DType::kI32;
    case 16: return DType::kF32;
    case 64: return DType::kF64;
    case 256: return DType::kI8;
    case 512: return DType::kU16;
    case 768: return DType::kU32;
    default: format_error(path, "unsupported NIfTI datatype " + std::to_string(code));
  }
}

RawImage parse_nifti(const fs::path& path) {
  std::vector<unsigned char> bytes = read_all_maybe_gz(path);
  if (bytes.size() < static_cast<std::size_t>(kNiftiHeaderSize))
    format_error(path, "truncated NIfTI header");
  const unsigned char* h = bytes.data();

  RawImage img;
  const auto sizeof_hdr = load_scalar<std::int32_t>(h, false);
  if (sizeof_hdr == kNiftiHeaderSize) {
    img.swap = false;
  } else if (load_scalar<std::int32_t>(h, true) == kNiftiHeaderSize) {
    img.swap = true;
  } else {
    format_error(path, "bad NIfTI header size");
  }
  if (std::memcmp(h + 344, "n+1\0", 4) != 0) format_error(path, "bad NIfTI magic");

  const bool sw = img.swap;
  std::int16_t dim[8];
  for (int i = 0; i < 8; ++i) dim[i] = load_scalar<std::int16_t>(h + 40 + 2 * i, sw);
  if (dim[0] < 3 || dim[0] > 7) format_error(path, "expected a 3D image");
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] != 1) format_error(path, "multi-component or time-series images are not supported");
  }
  img.dims = {dim[1], dim[2], dim[3]};
  if (!img.dims.positive()) format_error(path, "non-positive dimension");

  img.dtype = nifti_dtype(load_scalar<std::int16_t>(h + 70, sw), path);
  float pixdim[8];
  for (int i = 0; i < 8; ++i) pixdim[i] = load_scalar<float>(h + 76 + 4 * i, sw);
  img.spacing = {std::fabs(pixdim[1]), std::fabs(pixdim[2]), std::fabs(pixdim[3])};
  if (!img.spacing.valid()) format_error(path, "invalid voxel spacing");

  const float vox_offset = load_scalar<float>(h + 108, sw);
  const float slope = load_scalar<float>(h + 112, sw);
  const float inter = load_scalar<float>(h + 116, sw);
  if (std::isfinite(slope) && slope != 0.0f) {
    img.slope = slope;
    img.inter = std::isfinite(inter) ? inter : 0.0;
  }

  const auto qform_code = load_scalar<std::int16_t>(h + 252, sw);
  const auto sform_code = load_scalar<std::int16_t>(h + 254, sw);
  if (qform_code > 0) {
    for (int i = 0; i < 3; ++i) img.origin[i] = load_scalar<float>(h + 268 + 4 * i, sw);
  } else if (sform_code > 0) {
    for (int i = 0; i < 3; ++i) img.origin[i] = load_scalar<float>(h + 280 + 16 * i + 12, sw);
  }

  const auto offset = static_cast<std::size_t>(std::max<float>(vox_offset, kNiftiHeaderSize));
  const std::size_t need = img.dims.count() * dtype_size(img.dtype);
  if (bytes.size() < offset + need) format_error(path, "truncated voxel data");
  img.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                     bytes.begin() + static_cast<std::ptrdiff_t>(offset + need));
  return img;
}

RawImage parse_sidecar(const fs::path& path) {
  const std::vector<unsigned char> text = read_all(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    format_error(path, std::string("sidecar is not valid JSON: ") + e.what());
  }
  RawImage img;
  try {
    const auto dims = j.at("dims").get<std::vector<std::int64_t>>();
    const auto spacing = j.at("spacing").get<std::vector<double>>();
    const auto dtype = j.at("dtype").get<std::string>();
    if (dims.size() != 3 || spacing.size() != 3) format_error(path, "dims and spacing need 3 entries");
    img.dims = {dims[0], dims[1], dims[2]};
    img.spacing = {spacing[0], spacing[1], spacing[2]};
    if (dtype == "f32") {
      img.dtype = DType::kF32;
    } else if (dtype == "u8") {
      img.dtype = DType::kU8;
    } else {
      format_error(path, "unsupported sidecar dtype '" + dtype + "'");
    }
    if (j.contains("origin")) {
      const auto o = j.at("origin").get<std::vector<double>>();
      if (o.size() != 3) format_error(path, "origin needs 3 entries");
      img.origin = {o[0], o[1], o[2]};
    }
  } catch (const nlohmann::json::exception& e) {
    format_error(path, std::string("bad sidecar field: ") + e.what());
  }
  if (!img.dims.positive()) format_error(path, "non-positive dimension");
  if (!img.spacing.valid()) format_error(path, "invalid voxel spacing");
  img.swap = std::endian::native == std::endian::big;
  img.payload = read_all(raw_path_for(path));
  if (img.payload.size() != img.dims.count() * dtype_size(img.dtype))
    format_error(raw_path_for(path), "raw size does not match sidecar dims");
  return img;
}

RawImage parse_any(const fs::path& path) {
  return format_from_path(path) == FileFormat::kRawSidecar ? parse_sidecar(path) : parse_nifti(path);
}

template <typename Out>
std::vector<Out> convert(const RawImage& img, const fs::path& path, bool apply_scaling) {
  const std::size_t n = img.dims.count();
  const std::size_t es = dtype_size(img.dtype);
  const unsigned char* p = img.payload.data();
  std::vector<Out> out(n);
  const bool scale = apply_scaling && !(img.slope == 1.0 && img.inter == 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* e = p + i * es;
    double v = 0;
    switch (img.dtype) {
      case DType::kU8: v = *e; break;
      case DType::kI8: v = static_cast<std::int8_t>(*e); break;
      case DType::kI16: v = load_scalar<std::int16_t>(e, img.swap); break;
      case DType::kU16: v = load_scalar<std::uint16_t>(e, img.swap); break;
      case DType::kI32: v = load_scalar<std::int32_t>(e, img.swap); break;
      case DType::kU32: v = load_scalar<std::uint32_t>(e, img.swap); break;
      case DType::kF32:
        if constexpr (std::is_same_v<Out, float>) {
          if (!scale) {
            out[i] = load_scalar<float>(e, img.swap);
            continue;
          }
        }
        v = load_scalar<float>(e, img.swap);
        break;
      case DType::kF64: v = load_scalar<double>(e, img.swap); break;
    }
    if (scale) v = v * img.slope + img.inter;
    if constexpr (std::is_same_v<Out, float>) {
      out[i] = static_cast<float>(v);
    } else {
      if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v))
        format_error(path, "label value out of unsigned 8-bit range");
      out[i] = static_cast<Out>(v);
    }
  }
  return out;
}

std::vector<unsigned char> nifti_bytes(const Dims3& dims, const Spacing& spacing,
                                       const std::array<double, 3>& origin, bool is_float,
                                       const unsigned char* payload, std::size_t payload_size) {
  std::vector<unsigned char> out(static_cast<std::size_t>(kNiftiVoxOffset) + payload_size, 0);
  store_le<std::int32_t>(out, 0, kNiftiHeaderSize);
  out[39] = 0;  // dim_info
  const std::int16_t dim[8] = {3,
                               static_cast<std::int16_t>(dims.nx),
                               static_cast<std::int16_t>(dims.ny),
                               static_cast<std::int16_t>(dims.nz),
                               1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) store_le<std::int16_t>(out, 40 + 2 * i, dim[i]);
  store_le<std::int16_t>(out, 70, is_float ? 16 : 2);
  store_le<std::int16_t>(out, 72, is_float ? 32 : 8);
  const float pixdim[8] = {1.0f, static_cast<float>(spacing.dx), static_cast<float>(spacing.dy),
                           static_cast<float>(spacing.dz), 1.0f, 1.0f, 1.0f, 1.0f};
  for (int i = 0; i < 8; ++i) store_le<float>(out, 76 + 4 * i, pixdim[i]);
  store_le<float>(out, 108, static_cast<float>(kNiftiVoxOffset));
  store_le<float>(out, 112, 1.0f);
  store_le<float>(out, 116, 0.0f);
  out[123] = 2;  // xyzt_units: millimetres
  const char descrip[] = "tumorcp";
  std::memcpy(out.data() + 148, descrip, sizeof(descrip) - 1);
  store_le<std::int16_t>(out, 252, 1);  // qform: scanner, identity rotation
  store_le<std::int16_t>(out, 254, 1);  // sform
  for (int i = 0; i < 3; ++i) store_le<float>(out, 268 + 4 * i, static_cast<float>(origin[i]));
  for (int r = 0; r < 3; ++r) {
    store_le<float>(out, 280 + 16 * r + 4 * r, static_cast<float>(spacing[r]));
    store_le<float>(out, 280 + 16 * r + 12, static_cast<float>(origin[r]));
  }
  std::memcpy(out.data() + 344, "n+1\0", 4);
  std::memcpy(out.data() + kNiftiVoxOffset, payload, payload_size);
  return out;
}

void check_nifti_dims(const Dims3& dims, const fs::path& path) {
  constexpr std::int64_t kMax = std::numeric_limits<std::int16_t>::max();
  if (dims.nx > kMax || dims.ny > kMax || dims.nz > kMax)
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": dimension exceeds NIfTI-1 limit");
}

template <typename T>
std::vector<unsigned char> le_payload(std::span<const T> values) {
  std::vector<unsigned char> out(values.size_bytes());
  std::memcpy(out.data(), values.data(), out.size());
  if constexpr (sizeof(T) > 1 && std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < out.size(); i += sizeof(T))
      std::reverse(out.begin() + i, out.begin() + i + sizeof(T));
  }
  return out;
}

void write_image(const fs::path& path, const Dims3& dims, const Spacing& spacing,
                 const std::array<double, 3>& origin, bool is_float,
                 const std::vector<unsigned char>& payload) {
  const FileFormat fmt = format_from_path(path);
  if (fmt == FileFormat::kRawSidecar) {
    nlohmann::json j;
    j["dims"] = {dims.nx, dims.ny, dims.nz};
    j["spacing"] = {spacing.dx, spacing.dy, spacing.dz};
    j["dtype"] = is_float ? "f32" : "u8";
    if (origin != std::array<double, 3>{0, 0, 0}) j["origin"] = origin;
    const std::string text = j.dump(2) + "\n";
    write_all(raw_path_for(path), payload, false);
    write_all(path, std::vector<unsigned char>(text.begin(), text.end()), false);
    return;
  }
  check_nifti_dims(dims, path);
  write_all(path, nifti_bytes(dims, spacing, origin, is_float, payload.data(), payload.size()),
            fmt == FileFormat::kNiftiGz);
}

void ensure_parent_writable(const fs::path& path) {
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(parent, ec))
    throw Error(ErrorCode::kIoError, "destination directory does not exist: " + parent.string());
}

}  // namespace

FileFormat format_from_path(const fs::path& path) {
  const std::string name = path.filename().string();
  if (ends_with(name, ".nii.gz")) return FileFormat::kNiftiGz;
  if (ends_with(name, ".nii")) return FileFormat::kNifti;
  if (ends_with(name, ".json")) return FileFormat::kRawSidecar;
  throw Error(ErrorCode::kFormatError, "unrecognised image extension: " + path.string());
}

fs::path raw_path_for(const fs::path& sidecar) {
  fs::path raw = sidecar;
  raw.replace_extension(".raw");
  return raw;
}

Volume read_volume(const fs::path& path) {
  RawImage img = parse_any(path);
  Volume v;
  v.voxels = FloatGrid(img.dims, convert<float>(img, path, true));
  v.spacing = img.spacing;
  v.origin = img.origin;
  validate(v);
  return v;
}

LabelMap read_labelmap(const fs::path& path) {
  RawImage img = parse_any(path);
  LabelMap l;
  l.labels = MaskGrid(img.dims, convert<Label>(img, path, false));
  return l;
}

void write_volume(const fs::path& path, const Volume& volume) {
  validate(volume);
  ensure_parent_writable(path);
  write_image(path, volume.dims(), volume.spacing, volume.origin, true,
              le_payload(volume.voxels.values()));
}

void write_labelmap(const fs::path& path, const LabelMap& labelmap, const Volume& geometry) {
  validate_pair(geometry, labelmap);
  ensure_parent_writable(path);
  write_image(path, labelmap.dims(), geometry.spacing, geometry.origin, false,
              le_payload(labelmap.labels.values()));
}

std::pair<Volume, LabelMap> load_case(const CasePaths& paths) {
  Volume v = read_volume(paths.volume);
  LabelMap l = read_labelmap(paths.labelmap);
  validate_pair(v, l);
  return {std::move(v), std::move(l)};
}

void save_case(const Volume& volume, const LabelMap& labelmap, const CasePaths& paths) {
  validate_pair(volume, labelmap);
  write_volume(paths.volume, volume);
  write_labelmap(paths.labelmap, labelmap, volume);
}

}  // namespace tumorcp
