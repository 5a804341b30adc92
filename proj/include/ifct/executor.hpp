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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifct/attributes.hpp"
#include "ifct/error.hpp"
#include "ifct/guideline.hpp"
#include "ifct/labeler.hpp"
#include "ifct/plan.hpp"
#include "ifct/volume.hpp"

namespace ifct {

struct PatientRecord {
  std::string patient_id;
  int age_years = 0;
  std::string sex;
  std::map<std::string, bool> flags;
  std::string phase = "venous";  // venous, arterial or other

  /// Throws InvalidArgument for an age outside [0, 150] or an unknown phase.
  void validate() const;
  bool operator==(const PatientRecord&) const = default;
};

nlohmann::ordered_json to_json(const PatientRecord& patient);
PatientRecord patient_from_json(const nlohmann::ordered_json& j);

/// Values a patient rule can read: age_years (years), sex, phase, and every
/// flag. Flags named by `rules` but absent from the record read as false.
AttributeMap patient_facts(const PatientRecord& patient, const std::vector<PatientRule>& rules);

/// "true"/"false" for boolean predicates, the category for CategoryOf.
/// Quantities are converted to the predicate's unit before comparing.
std::string evaluate_predicate(const Predicate& pred, const AttributeMap& attrs);

/// Walks from the root to a leaf. MissingAttribute names the node.
DecisionPath execute_tree(const GuidelineTree& tree, const AttributeMap& attrs);

AttributeMap assess_patient(const std::vector<PatientRule>& rules, const PatientRecord& patient);

struct LesionOutcome {
  int lesion_id = 0;
  AttributeMap attributes;
  DecisionPath path;
  std::string trajectory;  // path_text of `path`
  std::string recommendation;
  int severity = 0;
  bool operator==(const LesionOutcome&) const = default;
};

struct AggregatedResult {
  std::string recommendation;
  int severity = 0;
  std::optional<int> source_lesion_id;  // absent for the no-lesion leaf
  DecisionPath path;
  std::string trajectory;
  bool operator==(const AggregatedResult&) const = default;
};

/// Highest severity wins, ties to the lowest lesion_id. An empty list maps to
/// the tree's no-lesion leaf (NoLesionLeafUndefined if it has none).
AggregatedResult aggregate_recommendations(const std::vector<LesionOutcome>& per_lesion, const GuidelineTree& tree);

struct TraceEvent {
  std::string step_id;
  std::string kind;
  std::string inputs;
  std::string output;
  double wall_ms = 0.0;
  bool operator==(const TraceEvent&) const = default;
};

struct CaseResult {
  std::string plan_id;
  std::vector<LesionOutcome> per_lesion;
  AttributeMap patient_attrs;
  AggregatedResult aggregated;
  std::vector<TraceEvent> trace;
};

/// Wall times are written only when `include_timing` is set, so results of
/// identical runs serialise identically.
nlohmann::ordered_json to_json(const CaseResult& result, bool include_timing = false);
CaseResult case_result_from_json(const nlohmann::ordered_json& j);
std::string serialize_case_result(const CaseResult& result, bool include_timing = false);
CaseResult parse_case_result(const std::string& text);

struct ExecutionProviders {
  std::shared_ptr<Labeler> labeler;  // required by ClassifyEach steps
};

/// Raised when a step fails. Keeps the original error kind and the trace of
/// the steps that completed.
class CaseFailed : public Error {
 public:
  CaseFailed(const Error& cause, std::string step_id, std::vector<TraceEvent> trace)
      : Error(cause.kind(), "step " + step_id + ": " + cause.what()),
        step_id_(std::move(step_id)),
        trace_(std::move(trace)) {}
  const std::string& step_id() const { return step_id_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }

 private:
  std::string step_id_;
  std::vector<TraceEvent> trace_;
};

/// Lesion descriptor handed to the labeler:
/// "organ=<o>; diameter_cm=<d, 2 decimals>; mean_hu=<h, 1 decimal>".
std::string lesion_subject(const std::string& organ, double diameter_cm, double mean_hu);

/// Runs the steps of a validated plan in order.
CaseResult execute_plan(const Plan& plan, const GuidelineTree& tree, const Volume& vol, const PatientRecord& patient,
                        const ExecutionProviders& providers);

}  // namespace ifct
