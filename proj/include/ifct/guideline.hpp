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
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ifct/attributes.hpp"
#include "ifct/predicate.hpp"

namespace ifct {

/// Which family of base function binds an attribute.
enum class Producer { Measure, Classify, Patient };

std::string to_string(Producer producer);
Producer parse_producer(const std::string& text);

/// One entry of a tree's attribute manifest.
struct AttributeDecl {
  std::string name;
  ValueType type = ValueType::Real;
  Unit unit = Unit::None;
  Producer producer = Producer::Measure;
  std::string function;  // registry name; required for measure attributes
  std::string method;    // estimator hint, e.g. "feret" for diameters
  std::vector<std::string> categories;
};

struct RiskCase {
  Predicate when;
  std::string category;
};

/// First matching case wins; `default_category` otherwise.
struct PatientRule {
  std::string output_attr;
  std::vector<RiskCase> cases;
  std::string default_category;
};

struct DecisionNode {
  Predicate predicate;
  /// (branch label, target node id) in document order.
  std::vector<std::pair<std::string, std::string>> branches;
};

struct LeafNode {
  std::string recommendation;
  int severity = 0;
};

struct Node {
  std::string id;
  std::string text;
  std::variant<DecisionNode, LeafNode> body;

  bool is_leaf() const { return std::holds_alternative<LeafNode>(body); }
  const DecisionNode& decision() const { return std::get<DecisionNode>(body); }
  const LeafNode& leaf() const { return std::get<LeafNode>(body); }
};

struct GuidelineTree {
  std::string organ;
  std::string version;
  std::string title;
  std::vector<AttributeDecl> attributes;
  std::vector<PatientRule> risk_rules;
  std::string root_id;
  /// Leaf reported when segmentation finds no lesion.
  std::optional<std::string> no_lesion_leaf;
  std::vector<Node> nodes;  // document order

  const Node* find(const std::string& id) const;
  const AttributeDecl* attribute(const std::string& name) const;
};

struct PathStep {
  std::string node_id;
  std::string branch;
  bool operator==(const PathStep&) const = default;
};

struct DecisionPath {
  std::vector<PathStep> steps;
  std::string leaf_id;
  std::string recommendation;
  bool operator==(const DecisionPath&) const = default;
};

struct Issue {
  std::string node_id;  // "_" when not tied to a node
  std::string rule;
  std::string detail;
};

/// Builds a tree from the document without checking graph invariants.
/// Throws SchemaError for missing or mistyped fields and PredicateError for
/// malformed predicates.
GuidelineTree load_guideline(const nlohmann::ordered_json& doc);

/// Parses and fully validates a guideline document. Graph violations raise
/// GraphError; other invariant violations raise SchemaError.
GuidelineTree parse_guideline(const std::string& document);
GuidelineTree read_guideline(const std::string& path);

std::vector<Issue> validate_tree(const GuidelineTree& tree);

/// One path per leaf, depth first, branches in document order.
std::vector<DecisionPath> enumerate_paths(const GuidelineTree& tree);

/// Throws PathMismatch unless `path` is a connected root-to-leaf walk of
/// `tree` ending at a leaf with the stated recommendation.
void check_path(const GuidelineTree& tree, const DecisionPath& path);
bool path_in_tree(const GuidelineTree& tree, const DecisionPath& path);

/// "<text> -> <branch>; ...; <recommendation>".
std::string path_text(const GuidelineTree& tree, const DecisionPath& path);

/// The enumerated path ending at `leaf_id`.
DecisionPath path_to_leaf(const GuidelineTree& tree, const std::string& leaf_id);

nlohmann::ordered_json to_json(const GuidelineTree& tree);
/// Canonical document text: two-space indented JSON plus a trailing newline.
std::string serialize_guideline(const GuidelineTree& tree);

nlohmann::ordered_json to_json(const DecisionPath& path);
DecisionPath decision_path_from_json(const nlohmann::ordered_json& j);

}  // namespace ifct
