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

#include "ifct/planner.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ifct {

using json = nlohmann::ordered_json;

SegmentationProtocol default_protocol(const std::string& organ) {
  SegmentationProtocol p;
  if (organ == "liver") {
    p.organ = {-100.0, 200.0, 1};
    p.mass = {-50.0, 45.0, 5};
  } else if (organ == "renal") {
    p.organ = {-100.0, 300.0, 1};
    p.mass = {-30.0, 110.0, 5};
  } else if (organ == "pancreas") {
    p.organ = {-100.0, 250.0, 1};
    p.mass = {-40.0, 80.0, 5};
  } else {
    p.organ = {-100.0, 300.0, 1};
    p.mass = {-50.0, 100.0, 5};
  }
  return p;
}

bool ValidationReport::syntactic_ok() const {
  return std::none_of(issues.begin(), issues.end(),
                      [](const PlanIssue& i) { return i.cls == IssueClass::Syntactic; });
}

bool ValidationReport::semantic_ok() const {
  return std::none_of(issues.begin(), issues.end(),
                      [](const PlanIssue& i) { return i.cls == IssueClass::Semantic; });
}

json to_json(const ValidationReport& report) {
  json j;
  j["syntactic_ok"] = report.syntactic_ok();
  j["semantic_ok"] = report.semantic_ok();
  json issues = json::array();
  for (const auto& i : report.issues) {
    json e;
    e["class"] = i.cls == IssueClass::Syntactic ? "syntactic" : "semantic";
    if (!i.step.empty()) e["step"] = i.step;
    if (!i.attr.empty()) e["attr"] = i.attr;
    e["rule"] = i.rule;
    e["message"] = i.message;
    issues.push_back(std::move(e));
  }
  j["issues"] = std::move(issues);
  return j;
}

std::string describe(const ValidationReport& report) {
  if (report.ok()) return "no issues";
  std::string out;
  for (const auto& i : report.issues) {
    if (!out.empty()) out += "; ";
    out += i.rule;
    if (!i.step.empty()) out += " [" + i.step + "]";
    out += ": " + i.message;
  }
  return out;
}

namespace {

FunctionKind function_kind_for(StepKind kind) {
  switch (kind) {
    case StepKind::SegmentOrgan:
    case StepKind::SegmentMasses:
      return FunctionKind::Segment;
    case StepKind::MeasureEach:
      return FunctionKind::Measure;
    case StepKind::ClassifyEach:
      return FunctionKind::Classify;
    case StepKind::AssessPatient:
      return FunctionKind::Patient;
    case StepKind::EvaluateTree:
      return FunctionKind::Evaluate;
    case StepKind::Aggregate:
      return FunctionKind::Aggregate;
  }
  return FunctionKind::Measure;
}

// Dataflow type a step publishes under its id.
std::string output_type(const Step& step, const FunctionSignature* sig) {
  switch (step.kind()) {
    case StepKind::SegmentOrgan:
      return sig ? sig->returns : "mask";
    case StepKind::SegmentMasses:
    case StepKind::MeasureEach:
    case StepKind::ClassifyEach:
      return "lesion_set";
    case StepKind::AssessPatient:
      return "patient_attributes";
    case StepKind::EvaluateTree:
      return "lesion_paths";
    case StepKind::Aggregate:
      return "recommendation";
  }
  return "";
}

// Parameter types of the step itself. Per-lesion steps take the scan and the
// running lesion set regardless of the wrapped function's own parameters.
std::vector<std::string> step_params(const Step& step, const FunctionSignature& sig) {
  if (step.kind() == StepKind::MeasureEach || step.kind() == StepKind::ClassifyEach) {
    return {"volume", "lesion_set"};
  }
  return sig.params;
}

std::string strip_optional(const std::string& t) {
  return !t.empty() && t.back() == '?' ? t.substr(0, t.size() - 1) : t;
}

bool optional_param(const std::string& t) { return !t.empty() && t.back() == '?'; }

std::string value_type_name(ValueType t) {
  switch (t) {
    case ValueType::Real:
      return "real";
    case ValueType::Boolean:
      return "boolean";
    case ValueType::Category:
      return "category";
  }
  return "";
}

bool is_diameter_function(const std::string& name) { return name.find("diameter") != std::string::npos; }

const PatientRule* find_rule(const GuidelineTree& tree, const std::string& output) {
  for (const auto& r : tree.risk_rules) {
    if (r.output_attr == output) return &r;
  }
  return nullptr;
}

// Attributes read by decision predicates, first occurrence order.
std::vector<std::string> tree_attributes(const GuidelineTree& tree) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& node : tree.nodes) {
    if (node.is_leaf()) continue;
    for (const auto& a : referenced_attributes(node.decision().predicate)) {
      if (seen.insert(a).second) out.push_back(a);
    }
  }
  return out;
}

// Attribute a step binds, empty if none.
std::string bound_attr(const Step& s) {
  if (const auto* m = std::get_if<MeasureEachStep>(&s.action)) return m->attr;
  if (const auto* c = std::get_if<ClassifyEachStep>(&s.action)) return c->attr;
  return "";
}

class Validator {
 public:
  Validator(const Plan& plan, const GuidelineTree& tree, const FunctionRegistry& registry)
      : plan_(plan), tree_(tree), registry_(registry) {}

  ValidationReport run() {
    syntactic();
    semantic();
    return std::move(report_);
  }

 private:
  void add(IssueClass cls, const std::string& step, const std::string& attr, const std::string& rule,
           const std::string& message) {
    report_.issues.push_back({cls, step, attr, rule, message});
  }

  void syntactic() {
    std::map<std::string, std::string> types = {{kScanInput, "volume"}, {kPatientInput, "patient_record"}};
    std::set<std::string> all_ids;
    for (const auto& s : plan_.steps) all_ids.insert(s.id);
    std::set<std::string> seen;
    for (const auto& step : plan_.steps) {
      if (step.id.empty()) {
        add(IssueClass::Syntactic, "", "", "empty step id", "step id must be nonempty");
      } else if (!seen.insert(step.id).second || step.id == kScanInput || step.id == kPatientInput) {
        add(IssueClass::Syntactic, step.id, "", "duplicate step id", "step id '" + step.id + "' is not unique");
      }
      const FunctionSignature* sig = registry_.find(step.function);
      if (!sig) {
        add(IssueClass::Syntactic, step.id, bound_attr(step), "unknown function",
            "function '" + step.function + "' is not in the registry");
      } else {
        if (sig->kind != function_kind_for(step.kind())) {
          add(IssueClass::Syntactic, step.id, bound_attr(step), "kind mismatch",
              "function '" + step.function + "' is a " + to_string(sig->kind) + " function, step is " +
                  to_string(step.kind()));
        }
        check_inputs(step, *sig, types, all_ids);
      }
      if (!step.id.empty() && !types.count(step.id)) types[step.id] = output_type(step, sig);
    }
    check_ordering();
  }

  void check_inputs(const Step& step, const FunctionSignature& sig, const std::map<std::string, std::string>& types,
                    const std::set<std::string>& all_ids) {
    const auto params = step_params(step, sig);
    std::size_t required = 0;
    for (const auto& p : params) required += optional_param(p) ? 0 : 1;
    if (step.inputs.size() < required || step.inputs.size() > params.size()) {
      add(IssueClass::Syntactic, step.id, "", "arity",
          "expected " + std::to_string(required) + ".." + std::to_string(params.size()) + " inputs, got " +
              std::to_string(step.inputs.size()));
    }
    const std::size_t n = std::min(step.inputs.size(), params.size());
    for (std::size_t k = 0; k < n; ++k) {
      const std::string& in = step.inputs[k];
      auto it = types.find(in);
      if (it == types.end()) {
        if (all_ids.count(in) && in != step.id) {
          add(IssueClass::Syntactic, step.id, "", "ordering", "input '" + in + "' is produced by a later step");
        } else {
          add(IssueClass::Syntactic, step.id, "", "dangling input", "input '" + in + "' is not defined");
        }
        continue;
      }
      const std::string want = strip_optional(params[k]);
      if (it->second != want) {
        add(IssueClass::Syntactic, step.id, "", "input type",
            "input '" + in + "' has type " + it->second + ", expected " + want);
      }
    }
  }

  void check_ordering() {
    const auto& steps = plan_.steps;
    auto first = [&](StepKind k) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].kind() == k) return i;
      }
      return std::nullopt;
    };
    const auto organ = first(StepKind::SegmentOrgan);
    const auto masses = first(StepKind::SegmentMasses);
    const auto eval = first(StepKind::EvaluateTree);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const Step& s = steps[i];
      const StepKind k = s.kind();
      std::string why;
      if (k == StepKind::SegmentMasses && organ && i < *organ) {
        why = "mass segmentation precedes organ segmentation";
      } else if ((k == StepKind::MeasureEach || k == StepKind::ClassifyEach) && masses && i < *masses) {
        why = "per-lesion step precedes mass segmentation";
      } else if ((k == StepKind::MeasureEach || k == StepKind::ClassifyEach || k == StepKind::AssessPatient) && eval &&
                 i > *eval) {
        why = "attribute producer follows tree evaluation";
      } else if (k == StepKind::EvaluateTree && masses && i < *masses) {
        why = "tree evaluation precedes mass segmentation";
      } else if (k == StepKind::Aggregate && i + 1 != steps.size()) {
        why = "aggregation is not the final step";
      }
      if (!why.empty()) add(IssueClass::Syntactic, s.id, "", "ordering", why);
    }
  }

  void semantic() {
    const TreeRef want{tree_.organ, tree_.version};
    if (!(plan_.tree_ref == want)) {
      add(IssueClass::Semantic, "", "", "tree ref",
          "plan targets " + plan_.tree_ref.organ + "@" + plan_.tree_ref.version + ", tree is " + want.organ + "@" +
              want.version);
    }
    std::map<StepKind, int> counts;
    for (const auto& s : plan_.steps) ++counts[s.kind()];
    auto count_rule = [&](StepKind k, const std::string& rule) {
      if (counts[k] != 1) {
        add(IssueClass::Semantic, "", "", rule,
            "expected exactly one " + to_string(k) + " step, found " + std::to_string(counts[k]));
      }
    };
    count_rule(StepKind::SegmentOrgan, "segmentation count");
    count_rule(StepKind::SegmentMasses, "segmentation count");
    count_rule(StepKind::EvaluateTree, "evaluate count");
    count_rule(StepKind::Aggregate, "aggregate count");

    std::optional<std::size_t> eval;
    for (std::size_t i = 0; i < plan_.steps.size(); ++i) {
      if (plan_.steps[i].kind() == StepKind::EvaluateTree) {
        eval = i;
        break;
      }
    }

    std::set<std::string> produced;  // before evaluation
    std::set<std::string> bound;
    for (std::size_t i = 0; i < plan_.steps.size(); ++i) {
      const Step& s = plan_.steps[i];
      const bool before_eval = !eval || i < *eval;
      if (const auto* p = std::get_if<SegmentOrganStep>(&s.action)) check_params(s, p->params);
      if (const auto* p = std::get_if<SegmentMassesStep>(&s.action)) check_params(s, p->params);
      if (s.kind() == StepKind::MeasureEach || s.kind() == StepKind::ClassifyEach) {
        const std::string attr = bound_attr(s);
        if (check_producer(s, attr)) {
          if (!bound.insert(attr).second) {
            add(IssueClass::Semantic, s.id, attr, "duplicate producer",
                "attribute '" + attr + "' is bound more than once");
          }
          if (before_eval) produced.insert(attr);
        }
      }
      if (const auto* a = std::get_if<AssessPatientStep>(&s.action)) {
        for (const auto& rule : a->rules) {
          if (!find_rule(tree_, rule)) {
            add(IssueClass::Semantic, s.id, rule, "unknown rule", "tree has no patient rule for '" + rule + "'");
            continue;
          }
          if (!bound.insert(rule).second) {
            add(IssueClass::Semantic, s.id, rule, "duplicate producer",
                "attribute '" + rule + "' is bound more than once");
          }
          if (before_eval) produced.insert(rule);
        }
      }
    }
    for (const auto& attr : tree_attributes(tree_)) {
      if (!produced.count(attr)) {
        add(IssueClass::Semantic, "", attr, "attribute never produced",
            "no step before tree evaluation binds '" + attr + "'");
      }
    }
  }

  void check_params(const Step& s, const SegmentationParams& p) {
    if (!(p.hu_low < p.hu_high) || p.min_component_voxels < 1) {
      add(IssueClass::Semantic, s.id, "", "params", "segmentation window or minimum size is invalid");
    }
  }

  // True when the step may count as the attribute's producer.
  bool check_producer(const Step& s, const std::string& attr) {
    const AttributeDecl* decl = tree_.attribute(attr);
    if (!decl) {
      add(IssueClass::Semantic, s.id, attr, "undeclared attribute", "tree does not declare '" + attr + "'");
      return false;
    }
    const bool measure = s.kind() == StepKind::MeasureEach;
    const Producer want = measure ? Producer::Measure : Producer::Classify;
    if (decl->producer != want) {
      add(IssueClass::Semantic, s.id, attr, "producer mismatch",
          "attribute '" + attr + "' is produced by " + to_string(decl->producer) + ", not " + to_string(want));
      return false;
    }
    const FunctionSignature* sig = registry_.find(s.function);
    if (measure) {
      if (sig && sig->kind == FunctionKind::Measure) {
        if (sig->returns != value_type_name(decl->type) || !units_compatible(sig->unit, decl->unit)) {
          add(IssueClass::Semantic, s.id, attr, "type mismatch",
              "function '" + s.function + "' returns " + sig->returns + " " + to_string(sig->unit) + ", '" + attr +
                  "' is " + value_type_name(decl->type) + " " + to_string(decl->unit));
        }
      }
    } else {
      const auto& labels = std::get<ClassifyEachStep>(s.action).labels;
      if (labels != decl->categories) {
        add(IssueClass::Semantic, s.id, attr, "labels mismatch",
            "label set differs from the categories of '" + attr + "'");
      }
    }
    return true;
  }

  const Plan& plan_;
  const GuidelineTree& tree_;
  const FunctionRegistry& registry_;
  ValidationReport report_;
};

int kind_rank(StepKind k) {
  switch (k) {
    case StepKind::SegmentOrgan:
      return 0;
    case StepKind::SegmentMasses:
      return 1;
    case StepKind::MeasureEach:
    case StepKind::ClassifyEach:
      return 2;
    case StepKind::AssessPatient:
      return 3;
    case StepKind::EvaluateTree:
      return 4;
    case StepKind::Aggregate:
      return 5;
  }
  return 6;
}

const FunctionSignature& require_function(const FunctionRegistry& registry, const std::string& name, FunctionKind kind,
                                          const std::string& purpose) {
  const FunctionSignature* sig = registry.find(name);
  if (!sig || sig->kind != kind) {
    throw UnresolvableProducer("no " + to_string(kind) + " function '" + name + "' in the registry for " + purpose);
  }
  return *sig;
}

std::optional<DiameterMethod> method_for(const AttributeDecl& decl, const SegmentationProtocol& protocol) {
  if (!is_diameter_function(decl.function)) return std::nullopt;
  if (protocol.diameter_method) return protocol.diameter_method;
  if (!decl.method.empty()) return parse_diameter_method(decl.method);
  return DiameterMethod::Feret;
}

Step producer_step(const AttributeDecl& decl, const FunctionRegistry& registry, const SegmentationProtocol& protocol) {
  Step s;
  if (decl.producer == Producer::Measure) {
    require_function(registry, decl.function, FunctionKind::Measure, "attribute '" + decl.name + "'");
    s.function = decl.function;
    s.action = MeasureEachStep{decl.name, method_for(decl, protocol)};
  } else {
    const std::string fn = decl.function.empty() ? "classify_label" : decl.function;
    require_function(registry, fn, FunctionKind::Classify, "attribute '" + decl.name + "'");
    s.function = fn;
    s.action = ClassifyEachStep{decl.name, decl.categories};
  }
  return s;
}

std::string patient_function(const GuidelineTree& tree) {
  for (const auto& a : tree.attributes) {
    if (a.producer == Producer::Patient && !a.function.empty()) return a.function;
  }
  return "assess_patient";
}

// Canonical step order with rewired inputs. Missing singleton steps are
// created; `producers` must already hold one step per attribute.
Plan assemble(const GuidelineTree& tree, const FunctionRegistry& registry, const SegmentationProtocol& protocol,
              std::vector<Step> steps, const std::string& plan_id) {
  auto has = [&](StepKind k) {
    return std::any_of(steps.begin(), steps.end(), [&](const Step& s) { return s.kind() == k; });
  };
  if (!has(StepKind::SegmentOrgan)) {
    require_function(registry, "segment_organ", FunctionKind::Segment, "organ segmentation");
    steps.push_back({"", "segment_organ", {}, SegmentOrganStep{protocol.organ}});
  }
  if (!has(StepKind::SegmentMasses)) {
    require_function(registry, "segment_masses", FunctionKind::Segment, "mass segmentation");
    steps.push_back({"", "segment_masses", {}, SegmentMassesStep{protocol.mass}});
  }
  if (!has(StepKind::EvaluateTree)) {
    require_function(registry, "evaluate_tree", FunctionKind::Evaluate, "tree evaluation");
    steps.push_back({"", "evaluate_tree", {}, EvaluateTreeStep{}});
  }
  if (!has(StepKind::Aggregate)) {
    require_function(registry, "agg_recommendations", FunctionKind::Aggregate, "aggregation");
    steps.push_back({"", "agg_recommendations", {}, AggregateStep{}});
  }

  std::map<std::string, std::size_t> manifest_pos;
  for (std::size_t i = 0; i < tree.attributes.size(); ++i) manifest_pos[tree.attributes[i].name] = i;
  std::stable_sort(steps.begin(), steps.end(), [&](const Step& a, const Step& b) {
    const int ra = kind_rank(a.kind());
    const int rb = kind_rank(b.kind());
    if (ra != rb) return ra < rb;
    if (ra == 2) return manifest_pos[bound_attr(a)] < manifest_pos[bound_attr(b)];
    return false;
  });

  // Keep existing unique ids; fill the rest with fresh s<k>.
  std::set<std::string> used;
  for (auto& s : steps) {
    if (s.id.empty() || s.id == kScanInput || s.id == kPatientInput || !used.insert(s.id).second) s.id.clear();
  }
  int next = 1;
  for (auto& s : steps) {
    if (!s.id.empty()) continue;
    std::string id;
    do {
      id = "s" + std::to_string(next++);
    } while (used.count(id));
    used.insert(id);
    s.id = id;
  }

  std::string organ_id, lesions_id, assess_id, eval_id;
  for (auto& s : steps) {
    switch (s.kind()) {
      case StepKind::SegmentOrgan:
        s.inputs = {kScanInput};
        organ_id = s.id;
        break;
      case StepKind::SegmentMasses:
        s.inputs = {kScanInput, organ_id};
        lesions_id = s.id;
        break;
      case StepKind::MeasureEach:
      case StepKind::ClassifyEach:
        s.inputs = {kScanInput, lesions_id};
        lesions_id = s.id;
        break;
      case StepKind::AssessPatient:
        s.inputs = {kPatientInput};
        assess_id = s.id;
        break;
      case StepKind::EvaluateTree:
        s.inputs = {lesions_id};
        if (!assess_id.empty()) s.inputs.push_back(assess_id);
        eval_id = s.id;
        break;
      case StepKind::Aggregate:
        s.inputs = {eval_id};
        break;
    }
  }

  Plan plan;
  plan.plan_id = plan_id.empty() ? "plan-" + tree.organ + "-" + tree.version : plan_id;
  plan.tree_ref = {tree.organ, tree.version};
  plan.steps = std::move(steps);
  return plan;
}

SegmentationProtocol resolve(const GuidelineTree& tree, const std::optional<SegmentationProtocol>& protocol) {
  return protocol ? *protocol : default_protocol(tree.organ);
}

}  // namespace

Plan synthesize_plan(const GuidelineTree& tree, const FunctionRegistry& registry,
                     const std::optional<SegmentationProtocol>& protocol) {
  const SegmentationProtocol proto = resolve(tree, protocol);
  std::vector<Step> steps;
  std::vector<std::string> rules;
  for (const auto& decl : tree.attributes) {
    if (decl.producer == Producer::Patient) {
      if (!find_rule(tree, decl.name)) {
        throw UnresolvableProducer("no patient rule produces attribute '" + decl.name + "'");
      }
      rules.push_back(decl.name);
    } else {
      steps.push_back(producer_step(decl, registry, proto));
    }
  }
  if (!rules.empty()) {
    const std::string fn = patient_function(tree);
    require_function(registry, fn, FunctionKind::Patient, "patient attributes");
    steps.push_back({"", fn, {}, AssessPatientStep{rules}});
  }
  return assemble(tree, registry, proto, std::move(steps), "");
}

ValidationReport validate_plan(const Plan& plan, const GuidelineTree& tree, const FunctionRegistry& registry) {
  return Validator(plan, tree, registry).run();
}

Plan refine_plan(const Plan& plan, const ValidationReport& report, const GuidelineTree& tree,
                 const FunctionRegistry& registry, const std::optional<SegmentationProtocol>& protocol) {
  static const std::set<std::string> kUnrepairable = {"unknown function", "kind mismatch", "type mismatch",
                                                      "producer mismatch", "params"};
  for (const auto& issue : report.issues) {
    if (kUnrepairable.count(issue.rule)) {
      throw Unrepairable(issue.rule + (issue.step.empty() ? "" : " [" + issue.step + "]") + ": " + issue.message);
    }
  }
  if (report.ok()) return plan;
  const SegmentationProtocol proto = resolve(tree, protocol);

  std::vector<Step> kept;
  std::set<StepKind> singletons;
  std::set<std::string> bound;
  std::optional<std::size_t> assess_at;
  for (const auto& s : plan.steps) {
    const StepKind k = s.kind();
    if (k == StepKind::MeasureEach || k == StepKind::ClassifyEach) {
      const std::string attr = bound_attr(s);
      const AttributeDecl* decl = tree.attribute(attr);
      if (!decl || !bound.insert(attr).second) continue;
      Step copy = s;
      if (auto* c = std::get_if<ClassifyEachStep>(&copy.action)) c->labels = decl->categories;
      kept.push_back(std::move(copy));
    } else if (k == StepKind::AssessPatient) {
      Step copy = s;
      auto& rules = std::get<AssessPatientStep>(copy.action).rules;
      std::vector<std::string> filtered;
      for (const auto& r : std::get<AssessPatientStep>(s.action).rules) {
        if (find_rule(tree, r) && bound.insert(r).second) filtered.push_back(r);
      }
      if (assess_at) {
        auto& first = std::get<AssessPatientStep>(kept[*assess_at].action).rules;
        first.insert(first.end(), filtered.begin(), filtered.end());
        continue;
      }
      rules = filtered;
      assess_at = kept.size();
      kept.push_back(std::move(copy));
    } else {
      if (!singletons.insert(k).second) continue;
      kept.push_back(s);
    }
  }

  for (const auto& issue : report.issues) {
    if (issue.rule != "attribute never produced" || bound.count(issue.attr)) continue;
    const AttributeDecl* decl = tree.attribute(issue.attr);
    if (!decl) throw Unrepairable("attribute '" + issue.attr + "' is not declared by the tree");
    bound.insert(issue.attr);
    if (decl->producer != Producer::Patient) {
      kept.push_back(producer_step(*decl, registry, proto));
      continue;
    }
    if (!find_rule(tree, decl->name)) throw Unrepairable("no patient rule produces '" + decl->name + "'");
    if (assess_at) {
      std::get<AssessPatientStep>(kept[*assess_at].action).rules.push_back(decl->name);
    } else {
      const std::string fn = patient_function(tree);
      require_function(registry, fn, FunctionKind::Patient, "patient attributes");
      assess_at = kept.size();
      kept.push_back({"", fn, {}, AssessPatientStep{{decl->name}}});
    }
  }
  // Rules inside the assess step follow manifest order.
  if (assess_at) {
    auto& rules = std::get<AssessPatientStep>(kept[*assess_at].action).rules;
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < tree.attributes.size(); ++i) pos[tree.attributes[i].name] = i;
    std::stable_sort(rules.begin(), rules.end(),
                     [&](const std::string& a, const std::string& b) { return pos[a] < pos[b]; });
  }
  return assemble(tree, registry, proto, std::move(kept), plan.plan_id);
}

PlanLoopResult plan_loop(const GuidelineTree& tree, const FunctionRegistry& registry, int max_iter,
                         const PlanDrafter& drafter, const std::optional<SegmentationProtocol>& protocol) {
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  PlanLoopResult result;
  result.plan = drafter ? drafter(tree, registry) : synthesize_plan(tree, registry, protocol);
  for (int i = 1; i <= max_iter; ++i) {
    ValidationReport report = validate_plan(result.plan, tree, registry);
    result.iterations = i;
    result.reports.push_back(report);
    if (report.ok()) return result;
    if (i == max_iter) throw MaxIterationsExceeded(std::move(report));
    result.plan = refine_plan(result.plan, report, tree, registry, protocol);
  }
  return result;
}

Plan external_plan(const GuidelineTree& tree, const FunctionRegistry& registry, PlannerClient& client) {
  Plan plan = client.request_plan(tree, registry);
  ValidationReport report = validate_plan(plan, tree, registry);
  if (!report.ok()) throw ValidationFailed(std::move(report));
  return plan;
}

}  // namespace ifct
