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

#include "ifct/plan.hpp"

#include <fstream>
#include <sstream>

#include "ifct/error.hpp"

namespace ifct {
namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

json params_json(const SegmentationParams& p) {
  json j;
  j["hu_low"] = p.hu_low;
  j["hu_high"] = p.hu_high;
  j["min_component_voxels"] = p.min_component_voxels;
  return j;
}

SegmentationParams params_from(const json& j) {
  return SegmentationParams{j.at("hu_low").get<double>(), j.at("hu_high").get<double>(),
                            j.at("min_component_voxels").get<int>()};
}

}  // namespace

std::string to_string(StepKind kind) {
  switch (kind) {
    case StepKind::SegmentOrgan: return "segment_organ";
    case StepKind::SegmentMasses: return "segment_masses";
    case StepKind::MeasureEach: return "measure_each";
    case StepKind::ClassifyEach: return "classify_each";
    case StepKind::AssessPatient: return "assess_patient";
    case StepKind::EvaluateTree: return "evaluate_tree";
    case StepKind::Aggregate: return "aggregate";
  }
  return "";
}

StepKind parse_step_kind(const std::string& text) {
  for (int k = 0; k <= static_cast<int>(StepKind::Aggregate); ++k) {
    if (to_string(static_cast<StepKind>(k)) == text) return static_cast<StepKind>(k);
  }
  throw SchemaError("unknown step kind '" + text + "'");
}

const Step* Plan::find(const std::string& id) const {
  for (const auto& s : steps) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

json to_json(const Plan& plan) {
  json j;
  j["plan_id"] = plan.plan_id;
  j["tree_ref"] = {{"organ", plan.tree_ref.organ}, {"version", plan.tree_ref.version}};
  j["steps"] = json::array();
  for (const auto& s : plan.steps) {
    json sj;
    sj["id"] = s.id;
    sj["kind"] = to_string(s.kind());
    sj["function"] = s.function;
    sj["inputs"] = s.inputs;
    std::visit(overloaded{
                   [&](const SegmentOrganStep& a) { sj["params"] = params_json(a.params); },
                   [&](const SegmentMassesStep& a) { sj["params"] = params_json(a.params); },
                   [&](const MeasureEachStep& a) {
                     sj["attr"] = a.attr;
                     if (a.method) sj["method"] = to_string(*a.method);
                   },
                   [&](const ClassifyEachStep& a) {
                     sj["attr"] = a.attr;
                     sj["labels"] = a.labels;
                   },
                   [&](const AssessPatientStep& a) { sj["rules"] = a.rules; },
                   [](const EvaluateTreeStep&) {},
                   [](const AggregateStep&) {},
               },
               s.action);
    j["steps"].push_back(std::move(sj));
  }
  return j;
}

Plan plan_from_json(const json& j) {
  try {
    Plan p;
    p.plan_id = j.at("plan_id").get<std::string>();
    p.tree_ref.organ = j.at("tree_ref").at("organ").get<std::string>();
    p.tree_ref.version = j.at("tree_ref").at("version").get<std::string>();
    for (const auto& sj : j.at("steps")) {
      Step s;
      s.id = sj.at("id").get<std::string>();
      s.function = sj.at("function").get<std::string>();
      s.inputs = sj.at("inputs").get<std::vector<std::string>>();
      switch (parse_step_kind(sj.at("kind").get<std::string>())) {
        case StepKind::SegmentOrgan: s.action = SegmentOrganStep{params_from(sj.at("params"))}; break;
        case StepKind::SegmentMasses: s.action = SegmentMassesStep{params_from(sj.at("params"))}; break;
        case StepKind::MeasureEach: {
          MeasureEachStep m{sj.at("attr").get<std::string>(), std::nullopt};
          if (sj.contains("method")) m.method = parse_diameter_method(sj.at("method").get<std::string>());
          s.action = std::move(m);
          break;
        }
        case StepKind::ClassifyEach:
          s.action = ClassifyEachStep{sj.at("attr").get<std::string>(), sj.at("labels").get<std::vector<std::string>>()};
          break;
        case StepKind::AssessPatient: s.action = AssessPatientStep{sj.at("rules").get<std::vector<std::string>>()}; break;
        case StepKind::EvaluateTree: s.action = EvaluateTreeStep{}; break;
        case StepKind::Aggregate: s.action = AggregateStep{}; break;
      }
      p.steps.push_back(std::move(s));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("plan: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("plan: ") + e.what());
  }
}

std::string serialize_plan(const Plan& plan) { return to_json(plan).dump(2) + "\n"; }

Plan parse_plan(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("plan: not valid JSON: ") + e.what());
  }
  return plan_from_json(j);
}

Plan read_plan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

}  // namespace ifct
