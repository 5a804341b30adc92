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

#include <gtest/gtest.h>

#include <set>

#include "ifct/error.hpp"
#include "ifct/guideline.hpp"
#include "support.hpp"

namespace ifct {
namespace {

using nlohmann::ordered_json;
using testing::minimal_tree_doc;
using testing::shipped_tree;

bool has_rule(const std::vector<Issue>& issues, const std::string& rule) {
  for (const auto& i : issues) {
    if (i.rule == rule) return true;
  }
  return false;
}

// Full binary tree over boolean attributes f0..f{depth-1}.
ordered_json full_binary_doc(int depth) {
  ordered_json doc;
  doc["organ"] = "liver";
  doc["version"] = "test";
  doc["attributes"] = ordered_json::array();
  for (int d = 0; d < depth; ++d) {
    doc["attributes"].push_back(
        {{"name", "f" + std::to_string(d)}, {"type", "boolean"}, {"producer", "measure"}, {"function", "mass_present"}});
  }
  doc["root"] = "d0_0";
  ordered_json nodes = ordered_json::object();
  for (int d = 0; d < depth; ++d) {
    for (int k = 0; k < (1 << d); ++k) {
      const std::string id = "d" + std::to_string(d) + "_" + std::to_string(k);
      const std::string child = d + 1 < depth ? "d" + std::to_string(d + 1) + "_" : "leaf_";
      nodes[id] = {{"kind", "decision"},
                   {"text", id},
                   {"predicate", {{"op", "eq"}, {"attr", "f" + std::to_string(d)}, {"value", true}}},
                   {"branches", {{"true", child + std::to_string(2 * k)}, {"false", child + std::to_string(2 * k + 1)}}}};
    }
  }
  for (int k = 0; k < (1 << depth); ++k) {
    const std::string id = "leaf_" + std::to_string(k);
    nodes[id] = {{"kind", "leaf"}, {"text", id}, {"recommendation", "action " + std::to_string(k)}, {"severity", k}};
  }
  doc["nodes"] = nodes;
  return doc;
}

TEST(Guideline, MinimalTree) {
  const auto tree = parse_guideline(minimal_tree_doc());
  EXPECT_EQ(tree.nodes.size(), 3u);
  EXPECT_TRUE(validate_tree(tree).empty());
  const auto paths = enumerate_paths(tree);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].leaf_id, "a");
  EXPECT_EQ(paths[0].steps, (std::vector<PathStep>{{"n0", "true"}}));
  EXPECT_EQ(paths[1].leaf_id, "b");
  EXPECT_EQ(paths[1].recommendation, "large lesion");
}

TEST(Guideline, DanglingBranchIsGraphError) {
  auto doc = ordered_json::parse(minimal_tree_doc());
  doc["nodes"]["n0"]["branches"]["false"] = "n9";
  EXPECT_THROW(parse_guideline(doc.dump()), GraphError);
}

TEST(Guideline, BadPredicateIsPredicateError) {
  auto doc = ordered_json::parse(minimal_tree_doc());
  doc["nodes"]["n0"]["predicate"].erase("value");
  EXPECT_THROW(parse_guideline(doc.dump()), PredicateError);
}

TEST(Guideline, MalformedDocumentsAreSchemaErrors) {
  EXPECT_THROW(parse_guideline("{not json"), SchemaError);
  EXPECT_THROW(parse_guideline("[]"), SchemaError);
  auto doc = ordered_json::parse(minimal_tree_doc());
  doc["nodes"]["a"]["kind"] = "branchy";
  EXPECT_THROW(parse_guideline(doc.dump()), SchemaError);
  EXPECT_THROW(read_guideline("/nonexistent/tree.json"), IoError);
}

TEST(Guideline, ShippedPathCounts) {
  EXPECT_EQ(enumerate_paths(shipped_tree("liver")).size(), 10u);
  EXPECT_EQ(enumerate_paths(shipped_tree("renal")).size(), 6u);
  EXPECT_EQ(enumerate_paths(shipped_tree("pancreas")).size(), 14u);
}

TEST(Guideline, ShippedTreesAreValid) {
  for (const char* organ : {"liver", "renal", "pancreas"}) {
    const auto tree = shipped_tree(organ);
    EXPECT_TRUE(validate_tree(tree).empty()) << organ;
    ASSERT_TRUE(tree.no_lesion_leaf.has_value());
    EXPECT_EQ(path_to_leaf(tree, *tree.no_lesion_leaf).steps.size(), 1u);
  }
}

TEST(Guideline, ValidateFindsTooFewBranches) {
  auto tree = parse_guideline(minimal_tree_doc());
  auto& d = std::get<DecisionNode>(tree.nodes[0].body);
  d.branches.pop_back();
  EXPECT_TRUE(has_rule(validate_tree(tree), "fewer than 2 branches"));
}

TEST(Guideline, ValidateFindsCycle) {
  auto tree = parse_guideline(minimal_tree_doc());
  std::get<DecisionNode>(tree.nodes[0].body).branches[1].second = "n0";
  const auto issues = validate_tree(tree);
  EXPECT_TRUE(has_rule(issues, "cycle"));
  EXPECT_TRUE(has_rule(issues, "unreachable"));
}

TEST(Guideline, ValidateFindsSharedNodeAndBadSeverity) {
  auto tree = parse_guideline(minimal_tree_doc());
  std::get<DecisionNode>(tree.nodes[0].body).branches[1].second = "a";
  std::get<LeafNode>(tree.nodes[1].body).severity = -1;
  const auto issues = validate_tree(tree);
  EXPECT_TRUE(has_rule(issues, "shared node"));
  EXPECT_TRUE(has_rule(issues, "negative severity"));
}

TEST(Guideline, PathTextFormatAndDistinctness) {
  const auto tree = parse_guideline(minimal_tree_doc());
  const auto paths = enumerate_paths(tree);
  EXPECT_EQ(path_text(tree, paths[0]), "small -> true; small lesion");
  for (const char* organ : {"liver", "renal", "pancreas"}) {
    const auto t = shipped_tree(organ);
    std::set<std::string> texts;
    for (const auto& p : enumerate_paths(t)) texts.insert(path_text(t, p));
    EXPECT_EQ(texts.size(), enumerate_paths(t).size()) << organ;
  }
}

TEST(Guideline, CheckPathRejectsForeignPaths) {
  const auto tree = parse_guideline(minimal_tree_doc());
  auto p = enumerate_paths(tree)[0];
  EXPECT_TRUE(path_in_tree(tree, p));
  p.steps[0].branch = "maybe";
  EXPECT_FALSE(path_in_tree(tree, p));
  EXPECT_THROW(check_path(tree, p), PathMismatch);
  EXPECT_THROW(path_to_leaf(tree, "n0"), PathMismatch);
}

TEST(Guideline, SerializeParseIdentity) {
  for (const char* organ : {"liver", "renal", "pancreas"}) {
    const auto tree = shipped_tree(organ);
    const std::string once = serialize_guideline(tree);
    const auto again = parse_guideline(once);
    EXPECT_EQ(serialize_guideline(again), once) << organ;
    EXPECT_EQ(enumerate_paths(again), enumerate_paths(tree)) << organ;
  }
}

TEST(Guideline, DecisionPathJsonRoundTrip) {
  const auto tree = shipped_tree("pancreas");
  for (const auto& p : enumerate_paths(tree)) EXPECT_EQ(decision_path_from_json(to_json(p)), p);
}

TEST(Guideline, FullBinaryTreeHasTwoToTheDepthPaths) {
  for (int depth = 1; depth <= 4; ++depth) {
    const auto tree = parse_guideline(full_binary_doc(depth).dump());
    const auto paths = enumerate_paths(tree);
    EXPECT_EQ(paths.size(), std::size_t{1} << depth);
    std::set<std::string> leaves;
    for (const auto& p : paths) {
      EXPECT_EQ(p.steps.size(), std::size_t(depth));
      leaves.insert(p.leaf_id);
    }
    EXPECT_EQ(leaves.size(), paths.size());
  }
}

TEST(Guideline, EnumerationIsDeterministic) {
  const auto tree = shipped_tree("liver");
  const auto first = enumerate_paths(tree);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(enumerate_paths(tree), first);
  EXPECT_EQ(enumerate_paths(parse_guideline(serialize_guideline(tree))), first);
}

TEST(Predicate, JsonRoundTrip) {
  const auto j = ordered_json::parse(R"({"op": "and", "args": [
      {"op": "in_range", "attr": "d", "lo": 1.0, "hi": 2.0, "unit": "cm", "lo_closed": false, "hi_closed": true},
      {"op": "not", "arg": {"op": "eq", "attr": "flag", "value": true}}]})");
  const auto p = predicate_from_json(j);
  EXPECT_EQ(to_json(p), j);
  EXPECT_EQ(referenced_attributes(p), (std::vector<std::string>{"d", "flag"}));
}

TEST(Predicate, Errors) {
  EXPECT_THROW(predicate_from_json(ordered_json::array()), PredicateError);
  EXPECT_THROW(predicate_from_json(ordered_json::parse(R"({"op": "not"})")), PredicateError);
  EXPECT_THROW(predicate_from_json(ordered_json::parse(R"({"op": "le", "attr": "d"})")), PredicateError);
}

}  // namespace
}  // namespace ifct
