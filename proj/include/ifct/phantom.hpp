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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifct/embedding.hpp"
#include "ifct/executor.hpp"
#include "ifct/guideline.hpp"
#include "ifct/volume.hpp"

namespace ifct {

/// Synthetic anatomy for one organ: a spherical organ in air, lesion HU and
/// diameter ranges, and the HU bands that decide the organ's imaging-feature
/// category.
struct PhantomProfile {
  std::string organ;
  Dims dims{68, 68, 68};
  Spacing spacing{1.0f, 1.0f, 1.0f};
  int background_hu = -1000;
  int organ_hu = 0;
  double organ_radius_mm = 30.0;
  int lesion_hu_lo = 0;
  int lesion_hu_hi = 0;
  double diameter_lo_mm = 5.0;
  double diameter_hi_mm = 32.0;
  std::string feature_attr;
  std::vector<IntensityBandProvider::Band> bands;
  double extra_lesion_rate = 0.3;
};

/// Profiles for liver, renal and pancreas. SpecError otherwise.
PhantomProfile phantom_profile(const std::string& organ);

struct LesionSpec {
  std::array<double, 3> center_mm{};
  double diameter_mm = 0.0;
  int hu = 0;
  bool operator==(const LesionSpec&) const = default;
};

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::string organ;
  Dims dims;
  Spacing spacing;
  int background_hu = -1000;
  int organ_hu = 0;
  double organ_radius_mm = 0.0;
  std::vector<LesionSpec> lesions;
  PatientRecord patient;
};

nlohmann::ordered_json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::ordered_json& j);

/// What a radiology report states about a case.
struct ReportFacts {
  std::vector<AttributeMap> lesions;  // stated lesion attributes, one map per lesion
  PatientRecord patient;
  std::string findings_text;
  std::string patient_text;
  std::optional<DecisionPath> oracle_path_hint;  // absent in blind mode
};

nlohmann::ordered_json to_json(const ReportFacts& facts);
ReportFacts report_facts_from_json(const nlohmann::ordered_json& j);

struct GeneratedCase {
  Volume volume;
  PatientRecord patient;
  ReportFacts facts;
  std::vector<AttributeMap> lesion_attrs;  // nominal, one per requested lesion
  std::vector<DecisionPath> lesion_paths;
  DecisionPath oracle;
  std::optional<std::size_t> oracle_lesion;  // index into spec.lesions
};

/// Threshold values (with their units) that decision predicates compare
/// `attr` against.
std::vector<Quantity> attribute_thresholds(const GuidelineTree& tree, const std::string& attr);

/// Nominal tree attributes of a lesion. Throws SpecError for attributes the
/// phantom cannot realise.
AttributeMap nominal_attributes(const GuidelineTree& tree, const PhantomProfile& profile, const LesionSpec& lesion);

/// True when no nominal value lies within digitisation error of a threshold:
/// 2 * max spacing for diameters, 1 HU for intensities and band edges.
bool clear_of_thresholds(const GuidelineTree& tree, const PhantomProfile& profile, const Spacing& spacing,
                         const LesionSpec& lesion);

/// Rasterises a SyntheticSpec and derives its oracle paths from nominal attributes.
/// Throws SpecError for overlapping or out-of-organ lesions, HU outside the
/// mass window, and threshold-adjacent values.
GeneratedCase gen_case(const SyntheticSpec& spec, const GuidelineTree& tree);

/// Draws a SyntheticSpec whose oracle leaf is chosen uniformly among the tree's leaves.
SyntheticSpec sample_spec(const GuidelineTree& tree, std::uint64_t seed);

}  // namespace ifct
