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
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

namespace ifct {

enum class Unit { None, Mm, Cm, Hu, Mm3, Years };

std::string to_string(Unit unit);
/// Accepts "mm", "cm", "HU", "mm3", "years"; empty string maps to Unit::None.
Unit parse_unit(const std::string& text);

/// Converts `value` from one unit to another. Only mm <-> cm are related;
/// anything else across different units throws UnitMismatch.
double convert_unit(double value, Unit from, Unit to);
bool units_compatible(Unit a, Unit b);

struct Quantity {
  double value = 0.0;
  Unit unit = Unit::None;
  bool operator==(const Quantity&) const = default;
};

struct Category {
  std::string value;
  bool operator==(const Category&) const = default;
};

using TypedValue = std::variant<Quantity, Category, bool>;

enum class ValueType { Real, Category, Boolean };

std::string to_string(ValueType type);
ValueType parse_value_type(const std::string& text);
ValueType type_of(const TypedValue& value);

std::string render(const TypedValue& value);

/// Name -> value map where each name is bound at most once.
class AttributeMap {
 public:
  /// Throws InvalidArgument if `name` is already bound.
  void bind(const std::string& name, TypedValue value);
  /// Binds every entry of `other`; names must not collide.
  void merge(const AttributeMap& other);

  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  const TypedValue* find(const std::string& name) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool operator==(const AttributeMap&) const = default;

 private:
  std::map<std::string, TypedValue> values_;
};

nlohmann::ordered_json to_json(const TypedValue& value);
TypedValue typed_value_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const AttributeMap& attrs);
AttributeMap attribute_map_from_json(const nlohmann::ordered_json& j);

}  // namespace ifct
