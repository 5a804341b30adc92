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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "ifct/error.hpp"
#include "ifct/volume.hpp"
#include "support.hpp"

namespace ifct {
namespace {

std::vector<std::uint8_t> header(const char* magic, std::uint32_t nx, std::uint32_t ny, std::uint32_t nz, float sx,
                                 float sy, float sz) {
  std::vector<std::uint8_t> b(kHeaderBytes);
  std::memcpy(b.data(), magic, 4);
  const std::uint32_t d[3] = {nx, ny, nz};
  const float s[3] = {sx, sy, sz};
  std::memcpy(b.data() + 4, d, 12);
  std::memcpy(b.data() + 16, s, 12);
  return b;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ifct_test_" + name);
}

TEST(VolumeFormat, MinimalFileDecodes) {
  auto bytes = header("CTV1", 1, 1, 1, 1.0f, 1.0f, 1.0f);
  bytes.push_back(0);
  bytes.push_back(0);
  const Volume v = decode_volume(bytes);
  EXPECT_EQ(v.dims(), (Dims{1, 1, 1}));
  EXPECT_EQ(v[0], 0);
}

TEST(VolumeFormat, BadMagicRejected) {
  auto bytes = header("CTM1", 1, 1, 1, 1.0f, 1.0f, 1.0f);
  bytes.resize(bytes.size() + 2);
  try {
    decode_volume(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(VolumeFormat, TruncatedPayloadRejected) {
  auto bytes = header("CTV1", 2, 2, 2, 1.0f, 1.0f, 1.0f);
  bytes.resize(bytes.size() + 7 * 2);
  try {
    decode_volume(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
}

TEST(VolumeFormat, NonPositiveGridRejected) {
  auto zero_dim = header("CTV1", 0, 1, 1, 1.0f, 1.0f, 1.0f);
  EXPECT_THROW(decode_volume(zero_dim), FormatError);
  auto bad_spacing = header("CTV1", 1, 1, 1, 0.0f, 1.0f, 1.0f);
  bad_spacing.resize(bad_spacing.size() + 2);
  EXPECT_THROW(decode_volume(bad_spacing), FormatError);
  auto nan_spacing = header("CTV1", 1, 1, 1, std::nanf(""), 1.0f, 1.0f);
  nan_spacing.resize(nan_spacing.size() + 2);
  EXPECT_THROW(decode_volume(nan_spacing), FormatError);
}

TEST(VolumeFormat, FileLengthIsHeaderPlusPayload) {
  const Volume v(Grid({3, 2, 1}, {1.0f, 1.0f, 1.0f}), std::int16_t{5});
  const auto path = temp_file("len.ctv");
  write_volume(v, path);
  EXPECT_EQ(std::filesystem::file_size(path), 28u + 12u);
  std::filesystem::remove(path);
}

TEST(VolumeFormat, RoundTripAndDeterministicWrites) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> hu(-32768, 32767);
  std::vector<std::int16_t> voxels(4 * 5 * 3);
  for (auto& x : voxels) x = static_cast<std::int16_t>(hu(rng));
  const Volume v(Grid({4, 5, 3}, {0.7f, 0.7f, 3.0f}), voxels);
  const auto a = temp_file("a.ctv");
  const auto b = temp_file("b.ctv");
  write_volume(v, a);
  write_volume(v, b);
  EXPECT_EQ(read_volume(a), v);
  EXPECT_EQ(read_file_bytes(a), read_file_bytes(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(VolumeFormat, MissingFileIsIoError) {
  EXPECT_THROW(read_volume("/nonexistent/dir/x.ctv"), IoError);
  const Volume v(Grid({1, 1, 1}, {1.0f, 1.0f, 1.0f}), std::int16_t{0});
  EXPECT_THROW(write_volume(v, "/nonexistent/dir/x.ctv"), IoError);
}

TEST(MaskFormat, RoundTrip) {
  Mask m(Grid({4, 3, 2}, {0.5f, 0.5f, 2.0f}));
  m.set(VoxelIndex{1, 2, 1});
  m.set(VoxelIndex{0, 0, 0});
  EXPECT_EQ(decode_mask(encode_mask(m)), m);
}

TEST(MaskFormat, InvalidByteRejected) {
  auto bytes = header("CTK1", 2, 1, 1, 1.0f, 1.0f, 1.0f);
  bytes.push_back(1);
  bytes.push_back(2);
  try {
    decode_mask(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid mask value"), std::string::npos);
  }
}

TEST(MaskFormat, EmptyMask) {
  auto bytes = header("CTK1", 4, 4, 4, 1.0f, 1.0f, 1.0f);
  bytes.resize(bytes.size() + 64, 0);
  const Mask m = decode_mask(bytes);
  EXPECT_EQ(m.popcount(), 0u);
  EXPECT_TRUE(m.empty());
}

TEST(Grid, VoxelVolume) {
  EXPECT_DOUBLE_EQ(voxel_volume_mm3(Grid({1, 1, 1}, {1.0f, 1.0f, 1.0f})), 1.0);
  EXPECT_DOUBLE_EQ(voxel_volume_mm3(Grid({1, 1, 1}, {0.5f, 0.5f, 2.0f})), 0.5);
  EXPECT_NEAR(voxel_volume_mm3(Grid({1, 1, 1}, {0.7f, 0.7f, 3.0f})), 1.47, 1e-6);
}

TEST(Grid, InvalidGridRejected) {
  EXPECT_THROW(Grid({0, 1, 1}, {1.0f, 1.0f, 1.0f}), InvalidArgument);
  EXPECT_THROW(Grid({1, 1, 1}, {-1.0f, 1.0f, 1.0f}), InvalidArgument);
}

TEST(Grid, JointOperationGuard) {
  const Grid a({2, 2, 2}, {1.0f, 1.0f, 1.0f});
  const Grid b({2, 2, 2}, {1.0f, 1.0f, 2.0f});
  const Grid c({2, 2, 3}, {1.0f, 1.0f, 1.0f});
  EXPECT_NO_THROW(require_same_grid(a, a, "test"));
  EXPECT_THROW(require_same_grid(a, b, "test"), DimensionMismatch);
  EXPECT_THROW(require_same_grid(a, c, "test"), DimensionMismatch);
}

TEST(Grid, LinearIndexIsBijection) {
  const Dims d{3, 4, 5};
  std::vector<bool> hit(d.count(), false);
  for (std::uint32_t k = 0; k < d.nz; ++k) {
    for (std::uint32_t j = 0; j < d.ny; ++j) {
      for (std::uint32_t i = 0; i < d.nx; ++i) {
        const std::size_t n = linear_index(d, {i, j, k});
        ASSERT_EQ(n, i + d.nx * (j + d.ny * k));
        ASSERT_FALSE(hit[n]);
        hit[n] = true;
        ASSERT_EQ(voxel_index(d, n), (VoxelIndex{i, j, k}));
      }
    }
  }
}

}  // namespace
}  // namespace ifct
