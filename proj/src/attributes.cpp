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

#include "ifct/attributes.hpp"

#include <cstdio>

#include "ifct/error.hpp"

namespace ifct {

std::string to_string(Unit unit) {
  switch (unit) {
    case Unit::None: return "";
    case Unit::Mm: return "mm";
    case Unit::Cm: return "cm";
    case Unit::Hu: return "HU";
    case Unit::Mm3: return "mm3";
    case Unit::Years: return "years";
  }
  return "";
}

Unit parse_unit(const std::string& text) {
  if (text.empty()) return Unit::None;
  if (text == "mm") return Unit::Mm;
  if (text == "cm") return Unit::Cm;
  if (text == "HU") return Unit::Hu;
  if (text == "mm3") return Unit::Mm3;
  if (text == "years") return Unit::Years;
  throw SchemaError("unknown unit '" + text + "'");
}

bool units_compatible(Unit a, Unit b) {
  if (a == b) return true;
  return (a == Unit::Mm && b == Unit::Cm) || (a == Unit::Cm && b == Unit::Mm);
}

double convert_unit(double value, Unit from, Unit to) {
  if (from == to) return value;
  if (from == Unit::Mm && to == Unit::Cm) return value / 10.0;
  if (from == Unit::Cm && to == Unit::Mm) return value * 10.0;
  throw UnitMismatch("cannot convert " + to_string(from) + " to " + to_string(to));
}

std::string to_string(ValueType type) {
  switch (type) {
    case ValueType::Real: return "real";
    case ValueType::Category: return "category";
    case ValueType::Boolean: return "boolean";
  }
  return "";
}

ValueType parse_value_type(const std::string& text) {
  if (text == "real") return ValueType::Real;
  if (text == "category") return ValueType::Category;
  if (text == "boolean") return ValueType::Boolean;
  throw SchemaError("unknown attribute type '" + text + "'");
}

ValueType type_of(const TypedValue& value) {
  switch (value.index()) {
    case 0: return ValueType::Real;
    case 1: return ValueType::Category;
    default: return ValueType::Boolean;
  }
}

std::string render(const TypedValue& value) {
  if (const auto* q = std::get_if<Quantity>(&value)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", q->value);
    std::string out = buf;
    if (q->unit != Unit::None) out += " " + to_string(q->unit);
    return out;
  }
  if (const auto* c = std::get_if<Category>(&value)) return c->value;
  return std::get<bool>(value) ? "true" : "false";
}

void AttributeMap::bind(const std::string& name, TypedValue value) {
  if (name.empty()) throw InvalidArgument("attribute name must be nonempty");
  auto [it, inserted] = values_.emplace(name, std::move(value));
  if (!inserted) throw InvalidArgument("attribute '" + name + "' bound twice");
}

void AttributeMap::merge(const AttributeMap& other) {
  for (const auto& [name, value] : other) bind(name, value);
}

const TypedValue* AttributeMap::find(const std::string& name) const {
  auto it = values_.find(name);
  return it == values_.end() ? nullptr : &it->second;
}

nlohmann::ordered_json to_json(const TypedValue& value) {
  nlohmann::ordered_json j;
  j["type"] = to_string(type_of(value));
  if (const auto* q = std::get_if<Quantity>(&value)) {
    j["value"] = q->value;
    if (q->unit != Unit::None) j["unit"] = to_string(q->unit);
  } else if (const auto* c = std::get_if<Category>(&value)) {
    j["value"] = c->value;
  } else {
    j["value"] = std::get<bool>(value);
  }
  return j;
}

TypedValue typed_value_from_json(const nlohmann::ordered_json& j) {
  try {
    switch (parse_value_type(j.at("type").get<std::string>())) {
      case ValueType::Real:
        return Quantity{j.at("value").get<double>(), parse_unit(j.value("unit", std::string{}))};
      case ValueType::Category:
        return Category{j.at("value").get<std::string>()};
      case ValueType::Boolean:
        return j.at("value").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("typed value: ") + e.what());
  }
  throw SchemaError("typed value: unreachable");
}

nlohmann::ordered_json to_json(const AttributeMap& attrs) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, value] : attrs) j[name] = to_json(value);
  return j;
}

AttributeMap attribute_map_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw SchemaError("attribute map must be an object");
  AttributeMap out;
  for (const auto& [name, value] : j.items()) out.bind(name, typed_value_from_json(value));
  return out;
}

}  // namespace ifct
