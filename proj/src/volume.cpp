// Copyright 2026 The ifct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ifct/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string_view>

#include "ifct/error.hpp"

namespace ifct {
namespace {

constexpr std::string_view kVolumeMagic = "CTV1";
constexpr std::string_view kMaskMagic = "CTK1";

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
  return v;
}

std::vector<std::uint8_t> encode_header(std::string_view magic, const Grid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes);
  out.insert(out.end(), magic.begin(), magic.end());
  put_u32(out, grid.dims().nx);
  put_u32(out, grid.dims().ny);
  put_u32(out, grid.dims().nz);
  put_u32(out, std::bit_cast<std::uint32_t>(grid.spacing().sx));
  put_u32(out, std::bit_cast<std::uint32_t>(grid.spacing().sy));
  put_u32(out, std::bit_cast<std::uint32_t>(grid.spacing().sz));
  return out;
}

Grid decode_header(std::span<const std::uint8_t> bytes, std::string_view magic) {
  if (bytes.size() < kHeaderBytes) {
    throw FormatError("truncated header: " + std::to_string(bytes.size()) + " bytes");
  }
  if (!std::equal(magic.begin(), magic.end(), bytes.begin())) {
    throw FormatError("bad magic: expected " + std::string(magic));
  }
  Dims dims{get_u32(bytes, 4), get_u32(bytes, 8), get_u32(bytes, 12)};
  Spacing spacing{std::bit_cast<float>(get_u32(bytes, 16)),
                  std::bit_cast<float>(get_u32(bytes, 20)),
                  std::bit_cast<float>(get_u32(bytes, 24))};
  try {
    return Grid(dims, spacing);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

void check_payload(std::span<const std::uint8_t> bytes, const Grid& grid, std::size_t bytes_per_voxel) {
  const std::size_t expected = kHeaderBytes + grid.size() * bytes_per_voxel;
  if (bytes.size() != expected) {
    throw FormatError("truncated payload: expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(bytes.size()));
  }
}

}  // namespace

double Spacing::max() const { return std::max({double(sx), double(sy), double(sz)}); }

std::size_t linear_index(const Dims& dims, const VoxelIndex& v) {
  return v.i + static_cast<std::size_t>(dims.nx) * (v.j + static_cast<std::size_t>(dims.ny) * v.k);
}

VoxelIndex voxel_index(const Dims& dims, std::size_t linear) {
  const std::size_t plane = static_cast<std::size_t>(dims.nx) * dims.ny;
  const auto k = static_cast<std::uint32_t>(linear / plane);
  const std::size_t rem = linear % plane;
  return {static_cast<std::uint32_t>(rem % dims.nx), static_cast<std::uint32_t>(rem / dims.nx), k};
}

std::array<double, 3> voxel_center_mm(const Spacing& s, const VoxelIndex& v) {
  return {v.i * double(s.sx), v.j * double(s.sy), v.k * double(s.sz)};
}

Grid::Grid(Dims dims, Spacing spacing) : dims_(dims), spacing_(spacing) {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) {
    throw InvalidArgument("non-positive dim");
  }
  for (float s : {spacing.sx, spacing.sy, spacing.sz}) {
    if (!std::isfinite(s) || s <= 0.0f) throw InvalidArgument("non-positive spacing");
  }
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw DimensionMismatch(std::string(what) + ": grids differ in dims or spacing");
}

Volume::Volume(Grid grid, std::vector<std::int16_t> voxels)
    : grid_(grid), voxels_(std::move(voxels)) {
  if (voxels_.size() != grid_.size()) {
    throw InvalidArgument("voxel count " + std::to_string(voxels_.size()) +
                          " does not match dims (" + std::to_string(grid_.size()) + ")");
  }
}

Volume::Volume(Grid grid, std::int16_t fill) : grid_(grid), voxels_(grid.size(), fill) {}

Mask::Mask(Grid grid) : grid_(grid), voxels_(grid.size(), 0) {}

Mask::Mask(Grid grid, std::vector<std::uint8_t> voxels) : grid_(grid), voxels_(std::move(voxels)) {
  if (voxels_.size() != grid_.size()) {
    throw InvalidArgument("voxel count " + std::to_string(voxels_.size()) +
                          " does not match dims (" + std::to_string(grid_.size()) + ")");
  }
  if (std::any_of(voxels_.begin(), voxels_.end(), [](std::uint8_t b) { return b > 1; })) {
    throw InvalidArgument("mask voxels must be 0 or 1");
  }
}

std::size_t Mask::popcount() const {
  return static_cast<std::size_t>(std::count(voxels_.begin(), voxels_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> Mask::foreground() const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < voxels_.size(); ++n) {
    if (voxels_[n]) out.push_back(n);
  }
  return out;
}

double voxel_volume_mm3(const Grid& grid) {
  const Spacing& s = grid.spacing();
  return double(s.sx) * double(s.sy) * double(s.sz);
}

std::vector<std::uint8_t> encode_volume(const Volume& vol) {
  auto out = encode_header(kVolumeMagic, vol.grid());
  out.reserve(kHeaderBytes + 2 * vol.voxels().size());
  for (std::int16_t v : vol.voxels()) {
    const auto u = static_cast<std::uint16_t>(v);
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

Volume decode_volume(std::span<const std::uint8_t> bytes) {
  Grid grid = decode_header(bytes, kVolumeMagic);
  check_payload(bytes, grid, 2);
  std::vector<std::int16_t> voxels(grid.size());
  for (std::size_t n = 0; n < voxels.size(); ++n) {
    const std::size_t at = kHeaderBytes + 2 * n;
    voxels[n] = static_cast<std::int16_t>(static_cast<std::uint16_t>(bytes[at] | (bytes[at + 1] << 8)));
  }
  return Volume(grid, std::move(voxels));
}

std::vector<std::uint8_t> encode_mask(const Mask& mask) {
  auto out = encode_header(kMaskMagic, mask.grid());
  out.insert(out.end(), mask.voxels().begin(), mask.voxels().end());
  return out;
}

Mask decode_mask(std::span<const std::uint8_t> bytes) {
  Grid grid = decode_header(bytes, kMaskMagic);
  check_payload(bytes, grid, 1);
  std::vector<std::uint8_t> voxels(bytes.begin() + kHeaderBytes, bytes.end());
  for (std::size_t n = 0; n < voxels.size(); ++n) {
    if (voxels[n] > 1) {
      throw FormatError("invalid mask value " + std::to_string(voxels[n]) + " at voxel " + std::to_string(n));
    }
  }
  return Mask(grid, std::move(voxels));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Volume read_volume(const std::filesystem::path& path) { return decode_volume(read_file_bytes(path)); }

void write_volume(const Volume& vol, const std::filesystem::path& path) {
  write_file_bytes(path, encode_volume(vol));
}

Mask read_mask(const std::filesystem::path& path) { return decode_mask(read_file_bytes(path)); }

void write_mask(const Mask& mask, const std::filesystem::path& path) {
  write_file_bytes(path, encode_mask(mask));
}

}  // namespace ifct
