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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifct/error.hpp"
#include "ifct/guideline.hpp"
#include "ifct/plan.hpp"
#include "ifct/registry.hpp"

namespace ifct {

/// Segmentation windows and diameter estimator used when drafting a plan.
struct SegmentationProtocol {
  SegmentationParams organ;
  SegmentationParams mass;
  /// Overrides the manifest's estimator for diameter measurements.
  std::optional<DiameterMethod> diameter_method;
};

/// Windows for the built-in organs; a generic soft-tissue protocol otherwise.
SegmentationProtocol default_protocol(const std::string& organ);

enum class IssueClass { Syntactic, Semantic };

struct PlanIssue {
  IssueClass cls = IssueClass::Syntactic;
  std::string step;  // empty when not tied to a step
  std::string attr;  // empty when not tied to an attribute
  std::string rule;
  std::string message;
};

/// The STOP criterion: a plan is accepted iff `issues` is empty.
struct ValidationReport {
  std::vector<PlanIssue> issues;

  bool syntactic_ok() const;
  bool semantic_ok() const;
  bool ok() const { return issues.empty(); }
};

nlohmann::ordered_json to_json(const ValidationReport& report);
std::string describe(const ValidationReport& report);

class MaxIterationsExceeded : public Error {
 public:
  explicit MaxIterationsExceeded(ValidationReport report)
      : Error("MaxIterationsExceeded", "plan still invalid after refinement: " + describe(report)),
        report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(ValidationReport report)
      : Error("ValidationFailed", "plan rejected: " + describe(report)), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Deterministic first draft: SegmentOrgan, SegmentMasses, one producer per
/// measure/classify attribute in manifest order, AssessPatient when the tree
/// has patient attributes, EvaluateTree, Aggregate.
Plan synthesize_plan(const GuidelineTree& tree, const FunctionRegistry& registry,
                     const std::optional<SegmentationProtocol>& protocol = std::nullopt);

ValidationReport validate_plan(const Plan& plan, const GuidelineTree& tree, const FunctionRegistry& registry);

/// Applies the repair rules for every issue in `report`. Throws Unrepairable
/// when an issue falls outside them.
Plan refine_plan(const Plan& plan, const ValidationReport& report, const GuidelineTree& tree,
                 const FunctionRegistry& registry, const std::optional<SegmentationProtocol>& protocol = std::nullopt);

/// Produces a first draft; the default drafter is synthesize_plan.
using PlanDrafter = std::function<Plan(const GuidelineTree&, const FunctionRegistry&)>;

struct PlanLoopResult {
  Plan plan;
  int iterations = 0;  // number of validations performed
  std::vector<ValidationReport> reports;
};

inline constexpr int kDefaultMaxIterations = 3;

/// Draft, then validate/refine until the plan passes or `max_iter`
/// validations have failed (MaxIterationsExceeded).
PlanLoopResult plan_loop(const GuidelineTree& tree, const FunctionRegistry& registry,
                         int max_iter = kDefaultMaxIterations, const PlanDrafter& drafter = {},
                         const std::optional<SegmentationProtocol>& protocol = std::nullopt);

/// A remote plan author. Implementations throw ProviderError on transport
/// failure.
class PlannerClient {
 public:
  virtual ~PlannerClient() = default;
  virtual Plan request_plan(const GuidelineTree& tree, const FunctionRegistry& registry) = 0;
};

/// Plan from `client`, accepted only if it passes validate_plan.
Plan external_plan(const GuidelineTree& tree, const FunctionRegistry& registry, PlannerClient& client);

}  // namespace ifct
