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

#include "golden_checks.hpp"

namespace ifct {
namespace {

TEST(Golden, VolumeFixtureValues) {
  const Volume v = decode_volume(testing::golden_bytes("volume_3x2x1.ctv"));
  EXPECT_EQ(v.dims().nx, 3u);
  EXPECT_EQ(v.dims().ny, 2u);
  EXPECT_EQ(v.dims().nz, 1u);
  EXPECT_FLOAT_EQ(v.spacing().sx, 0.7f);
  EXPECT_FLOAT_EQ(v.spacing().sz, 3.0f);
  const std::vector<std::int16_t> want{-1000, 0, 1, 2, 32767, -32768};
  EXPECT_EQ(std::vector<std::int16_t>(v.voxels().begin(), v.voxels().end()), want);
}

TEST(Golden, MaskFixtureValues) {
  const Mask m = decode_mask(testing::golden_bytes("mask_4x3x2.ctk"));
  const std::vector<std::uint8_t> want{0, 1, 1, 0, 1, 0, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 1, 0};
  EXPECT_EQ(std::vector<std::uint8_t>(m.voxels().begin(), m.voxels().end()), want);
  EXPECT_FLOAT_EQ(m.spacing().sy, 0.5f);
}

TEST(Golden, FixturesRoundTripByteExactly) {
  for (const auto& c : testing::golden_checks()) EXPECT_TRUE(c.ok) << c.name << ": " << c.detail;
}

TEST(Golden, ShippedTreeMatchesFixture) {
  EXPECT_EQ(testing::golden_text("guideline_liver.json"),
            serialize_guideline(read_guideline(std::string(IFCT_SOURCE_DIR) + "/data/guidelines/liver.json")));
}

}  // namespace
}  // namespace ifct
