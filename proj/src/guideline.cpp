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

#include "ifct/guideline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ifct/error.hpp"

namespace ifct {
namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return {};
  if (!it->is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw SchemaError(where + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

AttributeDecl load_attribute(const json& j) {
  if (!j.is_object()) throw SchemaError("attribute entry must be an object");
  AttributeDecl d;
  d.name = string_field(j, "name", "attribute");
  const std::string where = "attribute '" + d.name + "'";
  d.type = parse_value_type(string_field(j, "type", where));
  d.unit = parse_unit(optional_string(j, "unit", where));
  d.producer = parse_producer(string_field(j, "producer", where));
  d.function = optional_string(j, "function", where);
  d.method = optional_string(j, "method", where);
  if (auto it = j.find("categories"); it != j.end()) d.categories = string_list(*it, where + " categories");
  return d;
}

PatientRule load_rule(const json& j) {
  if (!j.is_object()) throw SchemaError("risk rule must be an object");
  PatientRule r;
  r.output_attr = string_field(j, "output", "risk rule");
  const std::string where = "risk rule '" + r.output_attr + "'";
  r.default_category = string_field(j, "default", where);
  const json& cases = field(j, "cases", where);
  if (!cases.is_array()) throw SchemaError(where + ": 'cases' must be an array");
  for (const auto& c : cases) {
    if (!c.is_object()) throw SchemaError(where + ": case must be an object");
    r.cases.push_back(RiskCase{predicate_from_json(field(c, "when", where)), string_field(c, "category", where)});
  }
  return r;
}

Node load_node(const std::string& id, const json& j) {
  const std::string where = "node '" + id + "'";
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  Node n;
  n.id = id;
  n.text = string_field(j, "text", where);
  const std::string kind = string_field(j, "kind", where);
  if (kind == "decision") {
    DecisionNode d;
    d.predicate = predicate_from_json(field(j, "predicate", where));
    const json& branches = field(j, "branches", where);
    if (!branches.is_object()) throw SchemaError(where + ": 'branches' must be an object");
    for (const auto& [label, target] : branches.items()) {
      if (!target.is_string()) throw SchemaError(where + ": branch '" + label + "' must name a node id");
      d.branches.emplace_back(label, target.get<std::string>());
    }
    n.body = std::move(d);
  } else if (kind == "leaf") {
    LeafNode l;
    l.recommendation = string_field(j, "recommendation", where);
    const json& sev = field(j, "severity", where);
    if (!sev.is_number_integer()) throw SchemaError(where + ": 'severity' must be an integer");
    l.severity = sev.get<int>();
    n.body = std::move(l);
  } else {
    throw SchemaError(where + ": unknown kind '" + kind + "'");
  }
  return n;
}

void check_predicate_types(const Predicate& pred, const GuidelineTree& tree, const std::string& node_id,
                           std::vector<Issue>& issues) {
  auto decl_for = [&](const std::string& attr) -> const AttributeDecl* {
    const AttributeDecl* d = tree.attribute(attr);
    if (!d) issues.push_back({node_id, "undeclared attribute", "'" + attr + "' is not in the attribute manifest"});
    return d;
  };
  auto require_type = [&](const AttributeDecl& d, ValueType want) {
    if (d.type != want) {
      issues.push_back({node_id, "attribute type",
                        "'" + d.name + "' is " + to_string(d.type) + ", predicate needs " + to_string(want)});
      return false;
    }
    return true;
  };
  auto require_unit = [&](const AttributeDecl& d, Unit u) {
    if (!units_compatible(d.unit, u)) {
      issues.push_back({node_id, "unit", "'" + d.name + "' in " + to_string(d.unit) + " compared in " + to_string(u)});
    }
  };
  std::visit(overloaded{
                 [&](const Compare& c) {
                   const AttributeDecl* d = decl_for(c.attr);
                   if (!d) return;
                   if (const auto* q = std::get_if<Quantity>(&c.value)) {
                     if (require_type(*d, ValueType::Real)) require_unit(*d, q->unit);
                   } else if (const auto* cat = std::get_if<Category>(&c.value)) {
                     if (require_type(*d, ValueType::Category) &&
                         std::find(d->categories.begin(), d->categories.end(), cat->value) == d->categories.end()) {
                       issues.push_back({node_id, "category value", "'" + cat->value + "' is not a category of '" + d->name + "'"});
                     }
                   } else {
                     require_type(*d, ValueType::Boolean);
                   }
                 },
                 [&](const InRange& r) {
                   const AttributeDecl* d = decl_for(r.attr);
                   if (d && require_type(*d, ValueType::Real)) require_unit(*d, r.unit);
                 },
                 [&](const CategoryOf& c) {
                   const AttributeDecl* d = decl_for(c.attr);
                   if (d) require_type(*d, ValueType::Category);
                 },
                 [&](const AllOf& a) { for (const auto& t : a.terms) check_predicate_types(t, tree, node_id, issues); },
                 [&](const AnyOf& a) { for (const auto& t : a.terms) check_predicate_types(t, tree, node_id, issues); },
                 [&](const Negation& n) { if (n.term) check_predicate_types(*n.term, tree, node_id, issues); },
             },
             pred.node);
}

void validate_manifest(const GuidelineTree& tree, std::vector<Issue>& issues) {
  std::set<std::string> names;
  for (const auto& d : tree.attributes) {
    if (d.name.empty()) issues.push_back({"_", "attribute", "attribute with empty name"});
    if (!names.insert(d.name).second) issues.push_back({"_", "duplicate attribute", d.name});
    if (d.type == ValueType::Category && d.categories.empty()) {
      issues.push_back({"_", "categories", "'" + d.name + "' declares no categories"});
    }
    if (d.type == ValueType::Category) {
      std::set<std::string> cats(d.categories.begin(), d.categories.end());
      if (cats.size() != d.categories.size()) issues.push_back({"_", "categories", "'" + d.name + "' repeats a category"});
    }
    if (d.producer == Producer::Measure && d.function.empty()) {
      issues.push_back({"_", "producer", "measure attribute '" + d.name + "' names no function"});
    }
    if (d.producer == Producer::Classify && d.type != ValueType::Category) {
      issues.push_back({"_", "producer", "classify attribute '" + d.name + "' must be a category"});
    }
    if (d.producer == Producer::Patient) {
      const bool produced = std::any_of(tree.risk_rules.begin(), tree.risk_rules.end(),
                                        [&](const PatientRule& r) { return r.output_attr == d.name; });
      if (!produced) issues.push_back({"_", "risk rule", "patient attribute '" + d.name + "' has no rule"});
    }
  }
  std::set<std::string> outputs;
  for (const auto& r : tree.risk_rules) {
    if (!outputs.insert(r.output_attr).second) issues.push_back({"_", "risk rule", "'" + r.output_attr + "' has two rules"});
    const AttributeDecl* d = tree.attribute(r.output_attr);
    if (!d || d->producer != Producer::Patient || d->type != ValueType::Category) {
      issues.push_back({"_", "risk rule", "'" + r.output_attr + "' is not a declared patient category"});
      continue;
    }
    auto known = [&](const std::string& c) {
      return std::find(d->categories.begin(), d->categories.end(), c) != d->categories.end();
    };
    if (!known(r.default_category)) issues.push_back({"_", "risk rule", "default '" + r.default_category + "' is not a category"});
    for (const auto& c : r.cases) {
      if (!known(c.category)) issues.push_back({"_", "risk rule", "case '" + c.category + "' is not a category"});
      for (const auto& p : predicate_problems(c.when)) issues.push_back({"_", "predicate", p});
    }
  }
}

void validate_node(const GuidelineTree& tree, const Node& n, std::vector<Issue>& issues) {
  if (n.is_leaf()) {
    if (n.leaf().recommendation.empty()) issues.push_back({n.id, "missing recommendation", ""});
    if (n.leaf().severity < 0) issues.push_back({n.id, "negative severity", std::to_string(n.leaf().severity)});
    return;
  }
  const DecisionNode& d = n.decision();
  if (d.branches.size() < 2) issues.push_back({n.id, "fewer than 2 branches", ""});
  std::set<std::string> labels;
  for (const auto& [label, target] : d.branches) {
    if (!labels.insert(label).second) issues.push_back({n.id, "duplicate branch label", label});
    if (!tree.find(target)) issues.push_back({n.id, "dangling branch", label + " -> " + target});
  }
  for (const auto& p : predicate_problems(d.predicate)) issues.push_back({n.id, "predicate", p});
  check_predicate_types(d.predicate, tree, n.id, issues);

  if (d.predicate.is_boolean()) {
    if (labels != std::set<std::string>{"true", "false"}) {
      issues.push_back({n.id, "branch labels", "boolean predicate needs exactly 'true' and 'false'"});
    }
  } else {
    const auto& attr = std::get<CategoryOf>(d.predicate.node).attr;
    if (const AttributeDecl* decl = tree.attribute(attr); decl && decl->type == ValueType::Category) {
      if (labels != std::set<std::string>(decl->categories.begin(), decl->categories.end())) {
        issues.push_back({n.id, "category coverage", "branches must match the categories of '" + attr + "'"});
      }
    }
  }
}

void validate_graph(const GuidelineTree& tree, std::vector<Issue>& issues) {
  std::map<std::string, int> seen_ids;
  for (const auto& n : tree.nodes) {
    if (n.id.empty()) issues.push_back({"_", "empty node id", ""});
    if (++seen_ids[n.id] == 2) issues.push_back({n.id, "duplicate node id", ""});
  }
  if (!tree.find(tree.root_id)) {
    issues.push_back({tree.root_id.empty() ? "_" : tree.root_id, "missing root", ""});
    return;
  }
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<std::string, int> state;
  std::map<std::string, int> parents;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    const Node* n = tree.find(id);
    if (!n) return;
    state[id] = 1;
    if (!n->is_leaf()) {
      for (const auto& [label, target] : n->decision().branches) {
        if (!tree.find(target)) continue;
        ++parents[target];
        if (state[target] == 1) {
          issues.push_back({id, "cycle", label + " -> " + target});
        } else if (state[target] == 2) {
          issues.push_back({target, "shared node", "reached again from " + id});
        } else {
          visit(target);
        }
      }
    }
    state[id] = 2;
  };
  visit(tree.root_id);
  if (parents[tree.root_id] > 0 && std::none_of(issues.begin(), issues.end(), [](const Issue& i) { return i.rule == "cycle"; })) {
    issues.push_back({tree.root_id, "cycle", "root has a parent"});
  }
  for (const auto& n : tree.nodes) {
    if (state[n.id] == 0) issues.push_back({n.id, "unreachable", ""});
  }
}

bool is_graph_rule(const std::string& rule) {
  static const std::set<std::string> kGraph = {"missing root",  "duplicate node id", "empty node id", "dangling branch",
                                               "cycle",         "shared node",       "unreachable",   "fewer than 2 branches"};
  return kGraph.count(rule) != 0;
}

std::string describe(const std::vector<Issue>& issues) {
  std::ostringstream out;
  for (std::size_t n = 0; n < issues.size(); ++n) {
    if (n) out << "; ";
    out << issues[n].node_id << ": " << issues[n].rule;
    if (!issues[n].detail.empty()) out << " (" << issues[n].detail << ")";
  }
  return out.str();
}

void walk_paths(const GuidelineTree& tree, const std::string& id, std::vector<PathStep>& prefix,
                std::set<std::string>& on_path, std::vector<DecisionPath>& out) {
  const Node* n = tree.find(id);
  if (!n || on_path.count(id)) return;
  if (n->is_leaf()) {
    out.push_back(DecisionPath{prefix, id, n->leaf().recommendation});
    return;
  }
  on_path.insert(id);
  for (const auto& [label, target] : n->decision().branches) {
    prefix.push_back({id, label});
    walk_paths(tree, target, prefix, on_path, out);
    prefix.pop_back();
  }
  on_path.erase(id);
}

}  // namespace

std::string to_string(Producer producer) {
  switch (producer) {
    case Producer::Measure: return "measure";
    case Producer::Classify: return "classify";
    case Producer::Patient: return "patient";
  }
  return "";
}

Producer parse_producer(const std::string& text) {
  if (text == "measure") return Producer::Measure;
  if (text == "classify") return Producer::Classify;
  if (text == "patient") return Producer::Patient;
  throw SchemaError("unknown producer '" + text + "'");
}

const Node* GuidelineTree::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const AttributeDecl* GuidelineTree::attribute(const std::string& name) const {
  for (const auto& a : attributes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

GuidelineTree load_guideline(const json& doc) {
  if (!doc.is_object()) throw SchemaError("guideline document must be an object");
  GuidelineTree t;
  t.organ = string_field(doc, "organ", "guideline");
  t.version = string_field(doc, "version", "guideline");
  t.title = optional_string(doc, "title", "guideline");
  const json& attrs = field(doc, "attributes", "guideline");
  if (!attrs.is_array()) throw SchemaError("guideline: 'attributes' must be an array");
  for (const auto& a : attrs) t.attributes.push_back(load_attribute(a));
  if (auto it = doc.find("risk_rules"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("guideline: 'risk_rules' must be an array");
    for (const auto& r : *it) t.risk_rules.push_back(load_rule(r));
  }
  t.root_id = string_field(doc, "root", "guideline");
  if (auto it = doc.find("no_lesion_leaf"); it != doc.end()) {
    if (!it->is_string()) throw SchemaError("guideline: 'no_lesion_leaf' must be a string");
    t.no_lesion_leaf = it->get<std::string>();
  }
  const json& nodes = field(doc, "nodes", "guideline");
  if (!nodes.is_object()) throw SchemaError("guideline: 'nodes' must be an object");
  for (const auto& [id, body] : nodes.items()) t.nodes.push_back(load_node(id, body));
  return t;
}

GuidelineTree parse_guideline(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("not valid JSON: ") + e.what());
  }
  GuidelineTree tree = load_guideline(doc);
  const auto issues = validate_tree(tree);
  if (issues.empty()) return tree;
  std::vector<Issue> graph, predicate, other;
  for (const auto& i : issues) {
    if (is_graph_rule(i.rule)) {
      graph.push_back(i);
    } else if (i.rule == "predicate") {
      predicate.push_back(i);
    } else {
      other.push_back(i);
    }
  }
  if (!graph.empty()) throw GraphError(describe(graph));
  if (!predicate.empty()) throw PredicateError(describe(predicate));
  throw SchemaError(describe(other));
}

GuidelineTree read_guideline(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_guideline(buf.str());
}

std::vector<Issue> validate_tree(const GuidelineTree& tree) {
  std::vector<Issue> issues;
  if (tree.organ.empty()) issues.push_back({"_", "organ", "organ must be nonempty"});
  validate_manifest(tree, issues);
  for (const auto& n : tree.nodes) validate_node(tree, n, issues);
  validate_graph(tree, issues);
  if (tree.no_lesion_leaf) {
    const Node* n = tree.find(*tree.no_lesion_leaf);
    if (!n || !n->is_leaf()) issues.push_back({*tree.no_lesion_leaf, "no-lesion leaf", "must name a leaf"});
  }
  return issues;
}

std::vector<DecisionPath> enumerate_paths(const GuidelineTree& tree) {
  std::vector<DecisionPath> out;
  std::vector<PathStep> prefix;
  std::set<std::string> on_path;
  walk_paths(tree, tree.root_id, prefix, on_path, out);
  return out;
}

void check_path(const GuidelineTree& tree, const DecisionPath& path) {
  std::string expected = tree.root_id;
  for (const auto& step : path.steps) {
    if (step.node_id != expected) throw PathMismatch("step '" + step.node_id + "' does not follow '" + expected + "'");
    const Node* n = tree.find(step.node_id);
    if (!n) throw PathMismatch("unknown node '" + step.node_id + "'");
    if (n->is_leaf()) throw PathMismatch("step '" + step.node_id + "' is a leaf");
    const auto& branches = n->decision().branches;
    auto it = std::find_if(branches.begin(), branches.end(), [&](const auto& b) { return b.first == step.branch; });
    if (it == branches.end()) throw PathMismatch("node '" + step.node_id + "' has no branch '" + step.branch + "'");
    expected = it->second;
  }
  if (path.leaf_id != expected) throw PathMismatch("path ends at '" + expected + "', not '" + path.leaf_id + "'");
  const Node* leaf = tree.find(path.leaf_id);
  if (!leaf || !leaf->is_leaf()) throw PathMismatch("'" + path.leaf_id + "' is not a leaf");
  if (leaf->leaf().recommendation != path.recommendation) throw PathMismatch("recommendation differs from leaf");
}

bool path_in_tree(const GuidelineTree& tree, const DecisionPath& path) {
  try {
    check_path(tree, path);
    return true;
  } catch (const PathMismatch&) {
    return false;
  }
}

std::string path_text(const GuidelineTree& tree, const DecisionPath& path) {
  check_path(tree, path);
  std::string out;
  for (const auto& step : path.steps) {
    out += tree.find(step.node_id)->text + " -> " + step.branch + "; ";
  }
  return out + path.recommendation;
}

DecisionPath path_to_leaf(const GuidelineTree& tree, const std::string& leaf_id) {
  for (auto& p : enumerate_paths(tree)) {
    if (p.leaf_id == leaf_id) return p;
  }
  throw PathMismatch("no path ends at '" + leaf_id + "'");
}

json to_json(const GuidelineTree& tree) {
  json doc;
  doc["organ"] = tree.organ;
  doc["version"] = tree.version;
  if (!tree.title.empty()) doc["title"] = tree.title;
  doc["attributes"] = json::array();
  for (const auto& a : tree.attributes) {
    json j;
    j["name"] = a.name;
    j["type"] = to_string(a.type);
    if (a.unit != Unit::None) j["unit"] = to_string(a.unit);
    j["producer"] = to_string(a.producer);
    if (!a.function.empty()) j["function"] = a.function;
    if (!a.method.empty()) j["method"] = a.method;
    if (!a.categories.empty()) j["categories"] = a.categories;
    doc["attributes"].push_back(std::move(j));
  }
  doc["risk_rules"] = json::array();
  for (const auto& r : tree.risk_rules) {
    json j;
    j["output"] = r.output_attr;
    j["cases"] = json::array();
    for (const auto& c : r.cases) {
      json cj;
      cj["when"] = to_json(c.when);
      cj["category"] = c.category;
      j["cases"].push_back(std::move(cj));
    }
    j["default"] = r.default_category;
    doc["risk_rules"].push_back(std::move(j));
  }
  doc["root"] = tree.root_id;
  if (tree.no_lesion_leaf) doc["no_lesion_leaf"] = *tree.no_lesion_leaf;
  doc["nodes"] = json::object();
  for (const auto& n : tree.nodes) {
    json j;
    if (n.is_leaf()) {
      j["kind"] = "leaf";
      j["text"] = n.text;
      j["recommendation"] = n.leaf().recommendation;
      j["severity"] = n.leaf().severity;
    } else {
      j["kind"] = "decision";
      j["text"] = n.text;
      j["predicate"] = to_json(n.decision().predicate);
      j["branches"] = json::object();
      for (const auto& [label, target] : n.decision().branches) j["branches"][label] = target;
    }
    doc["nodes"][n.id] = std::move(j);
  }
  return doc;
}

std::string serialize_guideline(const GuidelineTree& tree) { return to_json(tree).dump(2) + "\n"; }

json to_json(const DecisionPath& path) {
  json j;
  j["steps"] = json::array();
  for (const auto& s : path.steps) j["steps"].push_back(json::array({s.node_id, s.branch}));
  j["leaf"] = path.leaf_id;
  j["recommendation"] = path.recommendation;
  return j;
}

DecisionPath decision_path_from_json(const json& j) {
  try {
    DecisionPath p;
    for (const auto& s : j.at("steps")) p.steps.push_back({s.at(0).get<std::string>(), s.at(1).get<std::string>()});
    p.leaf_id = j.at("leaf").get<std::string>();
    p.recommendation = j.at("recommendation").get<std::string>();
    return p;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("decision path: ") + e.what());
  }
}

}  // namespace ifct
