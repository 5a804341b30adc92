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

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ifct/attributes.hpp"

namespace ifct {

enum class CompareOp { Le, Lt, Gt, Ge, Eq };

std::string to_string(CompareOp op);

struct Predicate;

/// `attr <op> value`. Ordering ops need a real value; Eq also accepts a
/// category or boolean value.
struct Compare {
  std::string attr;
  CompareOp op = CompareOp::Le;
  TypedValue value;
};

/// Real attribute inside [lo, hi] with per-end closedness; the default is
/// the half-open (lo, hi].
struct InRange {
  std::string attr;
  double lo = 0.0;
  double hi = 0.0;
  Unit unit = Unit::None;
  bool lo_closed = false;
  bool hi_closed = true;
};

/// Branches by the category value of `attr`.
struct CategoryOf {
  std::string attr;
};

struct AllOf {
  std::vector<Predicate> terms;
};

struct AnyOf {
  std::vector<Predicate> terms;
};

struct Negation {
  std::shared_ptr<const Predicate> term;
};

struct Predicate {
  std::variant<Compare, InRange, CategoryOf, AllOf, AnyOf, Negation> node;

  /// True unless the predicate is a CategoryOf.
  bool is_boolean() const { return !std::holds_alternative<CategoryOf>(node); }
};

Predicate make_not(Predicate p);

/// Attribute names in first-reference order, without duplicates.
std::vector<std::string> referenced_attributes(const Predicate& pred);

/// Grammar violations (empty attribute, lo >= hi, combinator arity, a
/// CategoryOf nested under a combinator). Empty when well formed.
std::vector<std::string> predicate_problems(const Predicate& pred);

/// Throws PredicateError on malformed input.
Predicate predicate_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const Predicate& pred);

}  // namespace ifct
