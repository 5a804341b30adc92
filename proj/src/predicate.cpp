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

#include "ifct/predicate.hpp"

#include <algorithm>

#include "ifct/error.hpp"

namespace ifct {
namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

CompareOp parse_compare_op(const std::string& op) {
  if (op == "le") return CompareOp::Le;
  if (op == "lt") return CompareOp::Lt;
  if (op == "gt") return CompareOp::Gt;
  if (op == "ge") return CompareOp::Ge;
  if (op == "eq") return CompareOp::Eq;
  throw PredicateError("unknown op '" + op + "'");
}

void collect(const Predicate& p, std::vector<std::string>& out) {
  std::visit(overloaded{
                 [&](const Compare& c) { out.push_back(c.attr); },
                 [&](const InRange& r) { out.push_back(r.attr); },
                 [&](const CategoryOf& c) { out.push_back(c.attr); },
                 [&](const AllOf& a) { for (const auto& t : a.terms) collect(t, out); },
                 [&](const AnyOf& a) { for (const auto& t : a.terms) collect(t, out); },
                 [&](const Negation& n) { if (n.term) collect(*n.term, out); },
             },
             p.node);
}

void problems(const Predicate& p, bool nested, std::vector<std::string>& out) {
  auto attr_check = [&](const std::string& attr) {
    if (attr.empty()) out.push_back("empty attribute name");
  };
  std::visit(overloaded{
                 [&](const Compare& c) {
                   attr_check(c.attr);
                   if (c.op != CompareOp::Eq && !std::holds_alternative<Quantity>(c.value)) {
                     out.push_back("ordering comparison on '" + c.attr + "' needs a real value");
                   }
                 },
                 [&](const InRange& r) {
                   attr_check(r.attr);
                   if (!(r.lo < r.hi)) out.push_back("range on '" + r.attr + "' needs lo < hi");
                 },
                 [&](const CategoryOf& c) {
                   attr_check(c.attr);
                   if (nested) out.push_back("category_of cannot be nested in a combinator");
                 },
                 [&](const AllOf& a) {
                   if (a.terms.size() < 2) out.push_back("and needs at least 2 terms");
                   for (const auto& t : a.terms) problems(t, true, out);
                 },
                 [&](const AnyOf& a) {
                   if (a.terms.size() < 2) out.push_back("or needs at least 2 terms");
                   for (const auto& t : a.terms) problems(t, true, out);
                 },
                 [&](const Negation& n) {
                   if (!n.term) {
                     out.push_back("not needs a term");
                   } else {
                     problems(*n.term, true, out);
                   }
                 },
             },
             p.node);
}

std::string required_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw PredicateError(std::string("predicate field '") + key + "' must be a string");
  return it->get<std::string>();
}

double required_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw PredicateError(std::string("predicate field '") + key + "' must be a number");
  return it->get<double>();
}

std::vector<Predicate> parse_terms(const json& j) {
  auto it = j.find("args");
  if (it == j.end() || !it->is_array()) throw PredicateError("combinator needs an 'args' array");
  std::vector<Predicate> out;
  for (const auto& a : *it) out.push_back(predicate_from_json(a));
  return out;
}

Unit parse_predicate_unit(const json& j) {
  try {
    return parse_unit(j.value("unit", std::string{}));
  } catch (const SchemaError& e) {
    throw PredicateError(e.what());
  }
}

}  // namespace

std::string to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Le: return "le";
    case CompareOp::Lt: return "lt";
    case CompareOp::Gt: return "gt";
    case CompareOp::Ge: return "ge";
    case CompareOp::Eq: return "eq";
  }
  return "";
}

Predicate make_not(Predicate p) { return Predicate{Negation{std::make_shared<const Predicate>(std::move(p))}}; }

std::vector<std::string> referenced_attributes(const Predicate& pred) {
  std::vector<std::string> all, out;
  collect(pred, all);
  for (auto& a : all) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(std::move(a));
  }
  return out;
}

std::vector<std::string> predicate_problems(const Predicate& pred) {
  std::vector<std::string> out;
  problems(pred, false, out);
  return out;
}

Predicate predicate_from_json(const json& j) {
  if (!j.is_object()) throw PredicateError("predicate must be an object");
  const std::string op = required_string(j, "op");
  Predicate p;
  if (op == "in_range") {
    InRange r;
    r.attr = required_string(j, "attr");
    r.lo = required_number(j, "lo");
    r.hi = required_number(j, "hi");
    r.unit = parse_predicate_unit(j);
    r.lo_closed = j.value("lo_closed", false);
    r.hi_closed = j.value("hi_closed", true);
    p.node = r;
  } else if (op == "category_of") {
    p.node = CategoryOf{required_string(j, "attr")};
  } else if (op == "and") {
    p.node = AllOf{parse_terms(j)};
  } else if (op == "or") {
    p.node = AnyOf{parse_terms(j)};
  } else if (op == "not") {
    auto it = j.find("arg");
    if (it == j.end()) throw PredicateError("not needs an 'arg'");
    p = make_not(predicate_from_json(*it));
  } else {
    Compare c;
    c.op = parse_compare_op(op);
    c.attr = required_string(j, "attr");
    auto it = j.find("value");
    if (it == j.end()) throw PredicateError("comparison needs a 'value'");
    if (it->is_number()) {
      c.value = Quantity{it->get<double>(), parse_predicate_unit(j)};
    } else if (it->is_boolean() && c.op == CompareOp::Eq) {
      c.value = it->get<bool>();
    } else if (it->is_string() && c.op == CompareOp::Eq) {
      c.value = Category{it->get<std::string>()};
    } else {
      throw PredicateError("comparison on '" + c.attr + "' has an unusable value");
    }
    p.node = std::move(c);
  }
  if (auto issues = predicate_problems(p); !issues.empty()) throw PredicateError(issues.front());
  return p;
}

json to_json(const Predicate& pred) {
  return std::visit(overloaded{
                        [](const Compare& c) {
                          json j;
                          j["op"] = to_string(c.op);
                          j["attr"] = c.attr;
                          if (const auto* q = std::get_if<Quantity>(&c.value)) {
                            j["value"] = q->value;
                            if (q->unit != Unit::None) j["unit"] = to_string(q->unit);
                          } else if (const auto* cat = std::get_if<Category>(&c.value)) {
                            j["value"] = cat->value;
                          } else {
                            j["value"] = std::get<bool>(c.value);
                          }
                          return j;
                        },
                        [](const InRange& r) {
                          json j;
                          j["op"] = "in_range";
                          j["attr"] = r.attr;
                          j["lo"] = r.lo;
                          j["hi"] = r.hi;
                          if (r.unit != Unit::None) j["unit"] = to_string(r.unit);
                          j["lo_closed"] = r.lo_closed;
                          j["hi_closed"] = r.hi_closed;
                          return j;
                        },
                        [](const CategoryOf& c) {
                          json j;
                          j["op"] = "category_of";
                          j["attr"] = c.attr;
                          return j;
                        },
                        [](const AllOf& a) {
                          json j;
                          j["op"] = "and";
                          j["args"] = json::array();
                          for (const auto& t : a.terms) j["args"].push_back(to_json(t));
                          return j;
                        },
                        [](const AnyOf& a) {
                          json j;
                          j["op"] = "or";
                          j["args"] = json::array();
                          for (const auto& t : a.terms) j["args"].push_back(to_json(t));
                          return j;
                        },
                        [](const Negation& n) {
                          json j;
                          j["op"] = "not";
                          j["arg"] = to_json(*n.term);
                          return j;
                        },
                    },
                    pred.node);
}

}  // namespace ifct
