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
#include <string>
#include <vector>

#include <json.hpp>

#include "ifct/attributes.hpp"

namespace ifct {

enum class FunctionKind { Segment, Measure, Classify, Patient, Evaluate, Aggregate };

std::string to_string(FunctionKind kind);
FunctionKind parse_function_kind(const std::string& text);

/// Declared signature of a base function. Parameter and return types are
/// dataflow type names ("volume", "mask", "lesion_set", "real", ...); a
/// trailing '?' marks an optional parameter.
struct FunctionSignature {
  std::string name;
  FunctionKind kind = FunctionKind::Measure;
  std::vector<std::string> params;
  std::string returns;
  Unit unit = Unit::None;
};

class FunctionRegistry {
 public:
  /// Throws InvalidArgument on a duplicate name.
  void add(FunctionSignature signature);
  const FunctionSignature* find(const std::string& name) const;
  const std::map<std::string, FunctionSignature>& entries() const { return entries_; }

  /// Every base function the executor implements.
  static FunctionRegistry defaults();

 private:
  std::map<std::string, FunctionSignature> entries_;
};

nlohmann::ordered_json to_json(const FunctionRegistry& registry);
FunctionRegistry registry_from_json(const nlohmann::ordered_json& j);
FunctionRegistry read_registry(const std::string& path);

}  // namespace ifct
