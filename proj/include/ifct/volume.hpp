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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ifct {

struct Dims {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  std::uint32_t nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  bool operator==(const Dims&) const = default;
};

/// Millimetres per voxel along x, y, z. Stored as binary32 so the on-disk
/// header round-trips exactly.
struct Spacing {
  float sx = 1.0f;
  float sy = 1.0f;
  float sz = 1.0f;

  double max() const;
  bool operator==(const Spacing&) const = default;
};

struct VoxelIndex {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint32_t k = 0;
  bool operator==(const VoxelIndex&) const = default;
};

/// Linear offset of (i, j, k) in x-fastest order: i + nx * (j + ny * k).
std::size_t linear_index(const Dims& dims, const VoxelIndex& v);
VoxelIndex voxel_index(const Dims& dims, std::size_t linear);

/// Voxel-centre position in millimetres.
std::array<double, 3> voxel_center_mm(const Spacing& spacing, const VoxelIndex& v);

/// Shared grid description of a Volume or Mask. Constructing one validates
/// positive dims and finite positive spacing.
class Grid {
 public:
  Grid(Dims dims, Spacing spacing);

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return dims_.count(); }

  bool operator==(const Grid&) const = default;

 private:
  Dims dims_;
  Spacing spacing_;
};

/// Throws DimensionMismatch unless both grids agree on dims and spacing.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// CT intensities in Hounsfield units, x-fastest.
class Volume {
 public:
  Volume(Grid grid, std::vector<std::int16_t> voxels);
  /// Volume filled with a constant value.
  Volume(Grid grid, std::int16_t fill);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims(); }
  const Spacing& spacing() const { return grid_.spacing(); }
  std::span<const std::int16_t> voxels() const { return voxels_; }
  std::int16_t at(const VoxelIndex& v) const { return voxels_[linear_index(dims(), v)]; }
  std::int16_t operator[](std::size_t linear) const { return voxels_[linear]; }

  /// Only for builders (phantom generation, tests); volumes are treated as
  /// immutable once handed to the pipeline.
  std::vector<std::int16_t>& mutable_voxels() { return voxels_; }

  bool operator==(const Volume&) const = default;

 private:
  Grid grid_;
  std::vector<std::int16_t> voxels_;
};

/// Binary label grid; every stored byte is 0 or 1.
class Mask {
 public:
  explicit Mask(Grid grid);
  Mask(Grid grid, std::vector<std::uint8_t> voxels);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims(); }
  const Spacing& spacing() const { return grid_.spacing(); }
  std::span<const std::uint8_t> voxels() const { return voxels_; }

  bool test(std::size_t linear) const { return voxels_[linear] != 0; }
  bool test(const VoxelIndex& v) const { return test(linear_index(dims(), v)); }
  void set(std::size_t linear, bool on = true) { voxels_[linear] = on ? 1 : 0; }
  void set(const VoxelIndex& v, bool on = true) { set(linear_index(dims(), v), on); }

  std::size_t popcount() const;
  bool empty() const { return popcount() == 0; }
  /// Linear indices of foreground voxels in ascending order.
  std::vector<std::size_t> foreground() const;

  bool operator==(const Mask&) const = default;

 private:
  Grid grid_;
  std::vector<std::uint8_t> voxels_;
};

double voxel_volume_mm3(const Grid& grid);
inline double voxel_volume_mm3(const Volume& v) { return voxel_volume_mm3(v.grid()); }
inline double voxel_volume_mm3(const Mask& m) { return voxel_volume_mm3(m.grid()); }

inline constexpr std::size_t kHeaderBytes = 28;

std::vector<std::uint8_t> encode_volume(const Volume& vol);
Volume decode_volume(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_mask(const Mask& mask);
Mask decode_mask(std::span<const std::uint8_t> bytes);

Volume read_volume(const std::filesystem::path& path);
void write_volume(const Volume& vol, const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);
void write_mask(const Mask& mask, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ifct
