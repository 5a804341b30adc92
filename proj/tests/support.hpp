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

#include <string>
#include <vector>

#include "ifct/guideline.hpp"
#include "ifct/volume.hpp"

namespace ifct::testing {

inline std::string source_path(const std::string& rel) { return std::string(IFCT_SOURCE_DIR) + "/" + rel; }

inline GuidelineTree shipped_tree(const std::string& organ) {
  return read_guideline(source_path("data/guidelines/" + organ + ".json"));
}

inline Mask mask_of(Dims dims, Spacing spacing, const std::vector<VoxelIndex>& on) {
  Mask m{Grid(dims, spacing)};
  for (const auto& v : on) m.set(v);
  return m;
}

/// One decision on diameter_cm (le 1.0 cm) and two leaves.
inline std::string minimal_tree_doc(const std::string& unit = "cm", double threshold = 1.0) {
  return R"({
  "organ": "liver",
  "version": "0.1",
  "attributes": [
    {"name": "diameter_cm", "type": "real", "unit": ")" +
         unit + R"(", "producer": "measure", "function": "calc_mass_diameter_)" + unit + R"("}
  ],
  "risk_rules": [],
  "root": "n0",
  "nodes": {
    "n0": {"kind": "decision", "text": "small", "predicate": {"op": "le", "attr": "diameter_cm", "value": )" +
         std::to_string(threshold) + R"(, "unit": ")" + unit + R"("},
           "branches": {"true": "a", "false": "b"}},
    "a": {"kind": "leaf", "text": "A", "recommendation": "small lesion", "severity": 1},
    "b": {"kind": "leaf", "text": "B", "recommendation": "large lesion", "severity": 2}
  }
})";
}

}  // namespace ifct::testing
