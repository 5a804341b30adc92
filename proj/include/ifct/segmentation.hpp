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

#include <cstddef>
#include <string>
#include <vector>

#include "ifct/attributes.hpp"
#include "ifct/volume.hpp"

namespace ifct {

/// Threshold window plus minimum component size. Components are always
/// 26-connected.
struct SegmentationParams {
  double hu_low = 0.0;
  double hu_high = 0.0;
  int min_component_voxels = 1;

  /// Throws InvalidArgument unless hu_low < hu_high and min size >= 1.
  void validate() const;
  bool operator==(const SegmentationParams&) const = default;
};

/// One segmented mass: a single nonempty 26-connected component.
struct LesionRecord {
  int lesion_id = 0;
  Mask mask;
  AttributeMap attributes;
};

/// Lesions ordered by descending voxel count, ties by ascending lesion_id.
struct LesionSet {
  std::vector<LesionRecord> lesions;
  std::string source_organ;
};

/// Foreground voxels with lo <= HU <= hi.
Mask threshold(const Volume& vol, double lo, double hi);

/// 26-connected components of `mask`. Each component lists its linear
/// indices ascending; components are ordered by their smallest index.
std::vector<std::vector<std::size_t>> connected_components(const Mask& mask);

/// Largest 26-connected component inside the HU window; empty mask when no
/// voxel qualifies. Equal-size components resolve to the one found first in
/// x-fastest scan order.
Mask segment_organ(const Volume& vol, const SegmentationParams& params);

/// Every 26-connected component of {v in organ : window(v)} with at least
/// params.min_component_voxels voxels. Ids follow scan order of discovery,
/// starting at 1.
LesionSet segment_masses(const Volume& vol, const Mask& organ, const SegmentationParams& params,
                         std::string organ_name = "");

}  // namespace ifct
