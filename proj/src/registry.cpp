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

#include "ifct/registry.hpp"

#include <fstream>

#include "ifct/error.hpp"

namespace ifct {

std::string to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::Segment: return "segment";
    case FunctionKind::Measure: return "measure";
    case FunctionKind::Classify: return "classify";
    case FunctionKind::Patient: return "patient";
    case FunctionKind::Evaluate: return "evaluate";
    case FunctionKind::Aggregate: return "aggregate";
  }
  return "";
}

FunctionKind parse_function_kind(const std::string& text) {
  if (text == "segment") return FunctionKind::Segment;
  if (text == "measure") return FunctionKind::Measure;
  if (text == "classify") return FunctionKind::Classify;
  if (text == "patient") return FunctionKind::Patient;
  if (text == "evaluate") return FunctionKind::Evaluate;
  if (text == "aggregate") return FunctionKind::Aggregate;
  throw SchemaError("unknown function kind '" + text + "'");
}

void FunctionRegistry::add(FunctionSignature signature) {
  const std::string name = signature.name;
  if (name.empty()) throw InvalidArgument("function name must be nonempty");
  if (!entries_.emplace(name, std::move(signature)).second) {
    throw InvalidArgument("function '" + name + "' registered twice");
  }
}

const FunctionSignature* FunctionRegistry::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

FunctionRegistry FunctionRegistry::defaults() {
  FunctionRegistry r;
  r.add({"segment_organ", FunctionKind::Segment, {"volume"}, "mask", Unit::None});
  r.add({"segment_masses", FunctionKind::Segment, {"volume", "mask"}, "lesion_set", Unit::None});
  r.add({"mass_present", FunctionKind::Measure, {"mask"}, "boolean", Unit::None});
  r.add({"calc_mass_diameter_cm", FunctionKind::Measure, {"mask"}, "real", Unit::Cm});
  r.add({"calc_mass_diameter_mm", FunctionKind::Measure, {"mask"}, "real", Unit::Mm});
  r.add({"mean_intensity_hu", FunctionKind::Measure, {"volume", "mask"}, "real", Unit::Hu});
  r.add({"mass_volume_mm3", FunctionKind::Measure, {"mask"}, "real", Unit::Mm3});
  r.add({"border_thickness_mm", FunctionKind::Measure, {"mask"}, "real", Unit::Mm});
  r.add({"classify_label", FunctionKind::Classify, {"text", "labels"}, "category", Unit::None});
  r.add({"assess_patient", FunctionKind::Patient, {"patient_record"}, "patient_attributes", Unit::None});
  r.add({"evaluate_tree", FunctionKind::Evaluate, {"lesion_set", "patient_attributes?"}, "lesion_paths", Unit::None});
  r.add({"agg_recommendations", FunctionKind::Aggregate, {"lesion_paths"}, "recommendation", Unit::None});
  return r;
}

nlohmann::ordered_json to_json(const FunctionRegistry& registry) {
  nlohmann::ordered_json j;
  j["functions"] = nlohmann::ordered_json::array();
  for (const auto& [name, sig] : registry.entries()) {
    nlohmann::ordered_json f;
    f["name"] = name;
    f["kind"] = to_string(sig.kind);
    f["params"] = sig.params;
    f["returns"] = sig.returns;
    if (sig.unit != Unit::None) f["unit"] = to_string(sig.unit);
    j["functions"].push_back(std::move(f));
  }
  return j;
}

FunctionRegistry registry_from_json(const nlohmann::ordered_json& j) {
  FunctionRegistry r;
  try {
    for (const auto& f : j.at("functions")) {
      FunctionSignature sig;
      sig.name = f.at("name").get<std::string>();
      sig.kind = parse_function_kind(f.at("kind").get<std::string>());
      sig.params = f.at("params").get<std::vector<std::string>>();
      sig.returns = f.at("returns").get<std::string>();
      sig.unit = parse_unit(f.value("unit", std::string{}));
      r.add(std::move(sig));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("registry: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("registry: ") + e.what());
  }
  return r;
}

FunctionRegistry read_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("registry: ") + e.what());
  }
  return registry_from_json(j);
}

}  // namespace ifct
