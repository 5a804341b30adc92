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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ifct/geometry.hpp"
#include "ifct/segmentation.hpp"

namespace ifct {

struct SegmentOrganStep {
  SegmentationParams params;
};
struct SegmentMassesStep {
  SegmentationParams params;
};
/// Per-lesion measurement bound to `attr`.
struct MeasureEachStep {
  std::string attr;
  std::optional<DiameterMethod> method;
};
/// Per-lesion labeler query bound to `attr`.
struct ClassifyEachStep {
  std::string attr;
  std::vector<std::string> labels;
};
/// Runs the tree's patient rules whose outputs are listed.
struct AssessPatientStep {
  std::vector<std::string> rules;
};
struct EvaluateTreeStep {};
struct AggregateStep {};

using StepAction = std::variant<SegmentOrganStep, SegmentMassesStep, MeasureEachStep, ClassifyEachStep,
                                AssessPatientStep, EvaluateTreeStep, AggregateStep>;

enum class StepKind { SegmentOrgan, SegmentMasses, MeasureEach, ClassifyEach, AssessPatient, EvaluateTree, Aggregate };

std::string to_string(StepKind kind);
StepKind parse_step_kind(const std::string& text);

/// Dataflow names available before any step runs.
inline constexpr const char* kScanInput = "scan";
inline constexpr const char* kPatientInput = "patient";

struct Step {
  std::string id;
  std::string function;
  std::vector<std::string> inputs;  // earlier step ids or primal inputs
  StepAction action;

  StepKind kind() const { return static_cast<StepKind>(action.index()); }
};

struct TreeRef {
  std::string organ;
  std::string version;
  bool operator==(const TreeRef&) const = default;
};

struct Plan {
  std::string plan_id;
  TreeRef tree_ref;
  std::vector<Step> steps;

  const Step* find(const std::string& id) const;
};

nlohmann::ordered_json to_json(const Plan& plan);
/// Throws SchemaError on malformed plan documents.
Plan plan_from_json(const nlohmann::ordered_json& j);
std::string serialize_plan(const Plan& plan);
Plan parse_plan(const std::string& text);
Plan read_plan(const std::string& path);

}  // namespace ifct
