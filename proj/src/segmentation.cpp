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

#include "ifct/segmentation.hpp"

#include <algorithm>
#include <deque>

#include "ifct/error.hpp"

namespace ifct {

void SegmentationParams::validate() const {
  if (!(hu_low < hu_high)) throw InvalidArgument("segmentation window requires hu_low < hu_high");
  if (min_component_voxels < 1) throw InvalidArgument("min_component_voxels must be >= 1");
}

Mask threshold(const Volume& vol, double lo, double hi) {
  Mask out(vol.grid());
  const auto voxels = vol.voxels();
  for (std::size_t n = 0; n < voxels.size(); ++n) {
    if (voxels[n] >= lo && voxels[n] <= hi) out.set(n);
  }
  return out;
}

std::vector<std::vector<std::size_t>> connected_components(const Mask& mask) {
  const Dims& d = mask.dims();
  std::vector<std::uint8_t> seen(mask.voxels().begin(), mask.voxels().end());  // 1 = unvisited foreground
  std::vector<std::vector<std::size_t>> components;
  std::deque<std::size_t> queue;

  for (std::size_t start = 0; start < seen.size(); ++start) {
    if (seen[start] != 1) continue;
    std::vector<std::size_t> component;
    seen[start] = 2;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      component.push_back(cur);
      const VoxelIndex v = voxel_index(d, cur);
      for (int dk = -1; dk <= 1; ++dk) {
        const long k = long(v.k) + dk;
        if (k < 0 || k >= long(d.nz)) continue;
        for (int dj = -1; dj <= 1; ++dj) {
          const long j = long(v.j) + dj;
          if (j < 0 || j >= long(d.ny)) continue;
          for (int di = -1; di <= 1; ++di) {
            const long i = long(v.i) + di;
            if (i < 0 || i >= long(d.nx)) continue;
            const std::size_t n = std::size_t(i) + std::size_t(d.nx) * (std::size_t(j) + std::size_t(d.ny) * std::size_t(k));
            if (seen[n] == 1) {
              seen[n] = 2;
              queue.push_back(n);
            }
          }
        }
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

namespace {

Mask mask_from(const Grid& grid, const std::vector<std::size_t>& indices) {
  Mask m(grid);
  for (std::size_t n : indices) m.set(n);
  return m;
}

}  // namespace

Mask segment_organ(const Volume& vol, const SegmentationParams& params) {
  params.validate();
  const auto components = connected_components(threshold(vol, params.hu_low, params.hu_high));
  const std::vector<std::size_t>* best = nullptr;
  for (const auto& c : components) {
    if (!best || c.size() > best->size()) best = &c;
  }
  if (!best) return Mask(vol.grid());
  return mask_from(vol.grid(), *best);
}

LesionSet segment_masses(const Volume& vol, const Mask& organ, const SegmentationParams& params,
                         std::string organ_name) {
  params.validate();
  require_same_grid(vol.grid(), organ.grid(), "segment_masses");
  Mask candidates = threshold(vol, params.hu_low, params.hu_high);
  for (std::size_t n = 0; n < candidates.voxels().size(); ++n) {
    if (!organ.test(n)) candidates.set(n, false);
  }

  LesionSet out;
  out.source_organ = std::move(organ_name);
  int next_id = 1;
  for (const auto& c : connected_components(candidates)) {
    if (c.size() < static_cast<std::size_t>(params.min_component_voxels)) continue;
    out.lesions.push_back(LesionRecord{next_id++, mask_from(vol.grid(), c), {}});
  }
  std::stable_sort(out.lesions.begin(), out.lesions.end(), [](const LesionRecord& a, const LesionRecord& b) {
    const auto na = a.mask.popcount(), nb = b.mask.popcount();
    if (na != nb) return na > nb;
    return a.lesion_id < b.lesion_id;
  });
  return out;
}

}  // namespace ifct
