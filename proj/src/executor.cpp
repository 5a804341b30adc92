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

#include "ifct/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <variant>

#include "ifct/geometry.hpp"
#include "ifct/segmentation.hpp"

namespace ifct {

using json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kPhases = {"venous", "arterial", "other"};

const TypedValue& lookup(const AttributeMap& attrs, const std::string& name) {
  const TypedValue* v = attrs.find(name);
  if (!v) throw MissingAttribute("attribute '" + name + "' is not bound");
  return *v;
}

double quantity_in(const TypedValue& v, Unit unit, const std::string& name) {
  const auto* q = std::get_if<Quantity>(&v);
  if (!q) throw TypeMismatch("attribute '" + name + "' is " + to_string(type_of(v)) + ", expected real");
  return convert_unit(q->value, q->unit, unit);
}

bool compare(double x, CompareOp op, double y) {
  switch (op) {
    case CompareOp::Le:
      return x <= y;
    case CompareOp::Lt:
      return x < y;
    case CompareOp::Gt:
      return x > y;
    case CompareOp::Ge:
      return x >= y;
    case CompareOp::Eq:
      return x == y;
  }
  return false;
}

bool holds(const Predicate& pred, const AttributeMap& attrs);

struct Holds {
  const AttributeMap& attrs;

  bool operator()(const Compare& c) const {
    const TypedValue& v = lookup(attrs, c.attr);
    if (const auto* q = std::get_if<Quantity>(&c.value)) {
      return compare(quantity_in(v, q->unit, c.attr), c.op, q->value);
    }
    if (c.op != CompareOp::Eq) throw TypeMismatch("only eq applies to non-real attribute '" + c.attr + "'");
    if (type_of(v) != type_of(c.value)) {
      throw TypeMismatch("attribute '" + c.attr + "' is " + to_string(type_of(v)) + ", predicate expects " +
                         to_string(type_of(c.value)));
    }
    return v == c.value;
  }

  bool operator()(const InRange& r) const {
    const double x = quantity_in(lookup(attrs, r.attr), r.unit, r.attr);
    const bool lo_ok = r.lo_closed ? x >= r.lo : x > r.lo;
    const bool hi_ok = r.hi_closed ? x <= r.hi : x < r.hi;
    return lo_ok && hi_ok;
  }

  bool operator()(const CategoryOf& c) const {
    throw TypeMismatch("category_of(" + c.attr + ") is not a condition");
  }

  bool operator()(const AllOf& a) const {
    return std::all_of(a.terms.begin(), a.terms.end(), [&](const Predicate& p) { return holds(p, attrs); });
  }

  bool operator()(const AnyOf& a) const {
    return std::any_of(a.terms.begin(), a.terms.end(), [&](const Predicate& p) { return holds(p, attrs); });
  }

  bool operator()(const Negation& n) const { return !holds(*n.term, attrs); }
};

bool holds(const Predicate& pred, const AttributeMap& attrs) { return std::visit(Holds{attrs}, pred.node); }

}  // namespace

void PatientRecord::validate() const {
  if (age_years < 0 || age_years > 150) throw InvalidArgument("age_years must lie in [0, 150]");
  if (!kPhases.count(phase)) throw InvalidArgument("unknown phase '" + phase + "'");
}

json to_json(const PatientRecord& patient) {
  json j;
  j["patient_id"] = patient.patient_id;
  j["age_years"] = patient.age_years;
  j["sex"] = patient.sex;
  json flags = json::object();
  for (const auto& [k, v] : patient.flags) flags[k] = v;
  j["flags"] = std::move(flags);
  j["phase"] = patient.phase;
  return j;
}

PatientRecord patient_from_json(const json& j) {
  try {
    PatientRecord p;
    p.patient_id = j.at("patient_id").get<std::string>();
    p.age_years = j.at("age_years").get<int>();
    p.sex = j.value("sex", std::string());
    if (j.contains("flags")) {
      for (const auto& [k, v] : j.at("flags").items()) p.flags[k] = v.get<bool>();
    }
    p.phase = j.value("phase", std::string("venous"));
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("patient record: ") + e.what());
  }
}

AttributeMap patient_facts(const PatientRecord& patient, const std::vector<PatientRule>& rules) {
  AttributeMap facts;
  facts.bind("age_years", Quantity{static_cast<double>(patient.age_years), Unit::Years});
  facts.bind("sex", Category{patient.sex});
  facts.bind("phase", Category{patient.phase});
  for (const auto& [k, v] : patient.flags) {
    if (!facts.contains(k)) facts.bind(k, v);
  }
  for (const auto& rule : rules) {
    for (const auto& c : rule.cases) {
      for (const auto& a : referenced_attributes(c.when)) {
        if (!facts.contains(a)) facts.bind(a, false);
      }
    }
  }
  return facts;
}

std::string evaluate_predicate(const Predicate& pred, const AttributeMap& attrs) {
  if (const auto* c = std::get_if<CategoryOf>(&pred.node)) {
    const TypedValue& v = lookup(attrs, c->attr);
    const auto* cat = std::get_if<Category>(&v);
    if (!cat) throw TypeMismatch("attribute '" + c->attr + "' is " + to_string(type_of(v)) + ", expected category");
    return cat->value;
  }
  return holds(pred, attrs) ? "true" : "false";
}

DecisionPath execute_tree(const GuidelineTree& tree, const AttributeMap& attrs) {
  DecisionPath path;
  const Node* node = tree.find(tree.root_id);
  if (!node) throw GraphError("root '" + tree.root_id + "' is not a node");
  while (!node->is_leaf()) {
    if (path.steps.size() > tree.nodes.size()) throw GraphError("cycle through node '" + node->id + "'");
    std::string label;
    try {
      label = evaluate_predicate(node->decision().predicate, attrs);
    } catch (const MissingAttribute& e) {
      throw MissingAttribute("node " + node->id + ": " + e.what());
    }
    const auto& branches = node->decision().branches;
    auto it = std::find_if(branches.begin(), branches.end(), [&](const auto& b) { return b.first == label; });
    if (it == branches.end()) throw ExecutionError("node " + node->id + " has no branch '" + label + "'");
    path.steps.push_back({node->id, label});
    node = tree.find(it->second);
    if (!node) throw GraphError("branch target '" + it->second + "' is not a node");
  }
  path.leaf_id = node->id;
  path.recommendation = node->leaf().recommendation;
  return path;
}

AttributeMap assess_patient(const std::vector<PatientRule>& rules, const PatientRecord& patient) {
  const AttributeMap facts = patient_facts(patient, rules);
  AttributeMap out;
  for (const auto& rule : rules) {
    std::string category = rule.default_category;
    for (const auto& c : rule.cases) {
      if (holds(c.when, facts)) {
        category = c.category;
        break;
      }
    }
    out.bind(rule.output_attr, Category{category});
  }
  return out;
}

AggregatedResult aggregate_recommendations(const std::vector<LesionOutcome>& per_lesion, const GuidelineTree& tree) {
  AggregatedResult out;
  if (per_lesion.empty()) {
    if (!tree.no_lesion_leaf) throw NoLesionLeafUndefined("tree " + tree.organ + " declares no no-lesion leaf");
    out.path = path_to_leaf(tree, *tree.no_lesion_leaf);
    out.recommendation = out.path.recommendation;
    out.severity = tree.find(*tree.no_lesion_leaf)->leaf().severity;
    out.trajectory = path_text(tree, out.path);
    return out;
  }
  const LesionOutcome* best = &per_lesion.front();
  for (const auto& l : per_lesion) {
    if (l.severity > best->severity || (l.severity == best->severity && l.lesion_id < best->lesion_id)) best = &l;
  }
  out.recommendation = best->recommendation;
  out.severity = best->severity;
  out.source_lesion_id = best->lesion_id;
  out.path = best->path;
  out.trajectory = best->trajectory;
  return out;
}

namespace {

json to_json(const LesionOutcome& l) {
  json j;
  j["lesion_id"] = l.lesion_id;
  j["attributes"] = ifct::to_json(l.attributes);
  j["path"] = ifct::to_json(l.path);
  j["trajectory"] = l.trajectory;
  j["recommendation"] = l.recommendation;
  j["severity"] = l.severity;
  return j;
}

LesionOutcome lesion_outcome_from_json(const json& j) {
  LesionOutcome l;
  l.lesion_id = j.at("lesion_id").get<int>();
  l.attributes = attribute_map_from_json(j.at("attributes"));
  l.path = decision_path_from_json(j.at("path"));
  l.trajectory = j.at("trajectory").get<std::string>();
  l.recommendation = j.at("recommendation").get<std::string>();
  l.severity = j.at("severity").get<int>();
  return l;
}

}  // namespace

json to_json(const CaseResult& result, bool include_timing) {
  json j;
  j["plan_id"] = result.plan_id;
  json lesions = json::array();
  for (const auto& l : result.per_lesion) lesions.push_back(to_json(l));
  j["per_lesion"] = std::move(lesions);
  j["patient_attrs"] = to_json(result.patient_attrs);
  json agg;
  agg["recommendation"] = result.aggregated.recommendation;
  agg["severity"] = result.aggregated.severity;
  if (result.aggregated.source_lesion_id) agg["source_lesion_id"] = *result.aggregated.source_lesion_id;
  agg["path"] = to_json(result.aggregated.path);
  agg["trajectory"] = result.aggregated.trajectory;
  j["aggregated"] = std::move(agg);
  json trace = json::array();
  for (const auto& e : result.trace) {
    json t;
    t["step"] = e.step_id;
    t["kind"] = e.kind;
    t["inputs"] = e.inputs;
    t["output"] = e.output;
    if (include_timing) t["wall_ms"] = e.wall_ms;
    trace.push_back(std::move(t));
  }
  j["trace"] = std::move(trace);
  return j;
}

CaseResult case_result_from_json(const json& j) {
  try {
    CaseResult r;
    r.plan_id = j.at("plan_id").get<std::string>();
    for (const auto& l : j.at("per_lesion")) r.per_lesion.push_back(lesion_outcome_from_json(l));
    r.patient_attrs = attribute_map_from_json(j.at("patient_attrs"));
    const json& agg = j.at("aggregated");
    r.aggregated.recommendation = agg.at("recommendation").get<std::string>();
    r.aggregated.severity = agg.at("severity").get<int>();
    if (agg.contains("source_lesion_id")) r.aggregated.source_lesion_id = agg.at("source_lesion_id").get<int>();
    r.aggregated.path = decision_path_from_json(agg.at("path"));
    r.aggregated.trajectory = agg.at("trajectory").get<std::string>();
    for (const auto& t : j.at("trace")) {
      TraceEvent e;
      e.step_id = t.at("step").get<std::string>();
      e.kind = t.at("kind").get<std::string>();
      e.inputs = t.at("inputs").get<std::string>();
      e.output = t.at("output").get<std::string>();
      e.wall_ms = t.value("wall_ms", 0.0);
      r.trace.push_back(std::move(e));
    }
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("case result: ") + e.what());
  }
}

std::string serialize_case_result(const CaseResult& result, bool include_timing) {
  return to_json(result, include_timing).dump(2) + "\n";
}

CaseResult parse_case_result(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("case result: ") + e.what());
  }
  return case_result_from_json(j);
}

std::string lesion_subject(const std::string& organ, double diameter_cm, double mean_hu) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "; diameter_cm=%.2f; mean_hu=%.1f", diameter_cm, mean_hu);
  return "organ=" + organ + buf;
}

namespace {

struct LesionTable {
  std::shared_ptr<const LesionSet> set;
  std::vector<AttributeMap> attrs;  // parallel to set->lesions
};

using Value = std::variant<Mask, LesionTable, AttributeMap, std::vector<LesionOutcome>, AggregatedResult>;

double diameter_mm(const Mask& mask, DiameterMethod method) {
  switch (method) {
    case DiameterMethod::Feret:
      return diameter_feret_mm(mask);
    case DiameterMethod::EquivSphere:
      return diameter_equiv_sphere_mm(mask);
    case DiameterMethod::BBox:
      return diameter_bbox_mm(mask);
  }
  return 0.0;
}

TypedValue run_measure(const std::string& fn, const Volume& vol, const Mask& mask,
                       std::optional<DiameterMethod> method) {
  const DiameterMethod m = method.value_or(DiameterMethod::Feret);
  if (fn == "mass_present") return mask.popcount() > 0;
  if (fn == "calc_mass_diameter_cm") return Quantity{calc_mass_diameter_cm(mask, m), Unit::Cm};
  if (fn == "calc_mass_diameter_mm") return Quantity{diameter_mm(mask, m), Unit::Mm};
  if (fn == "mean_intensity_hu") return Quantity{mean_intensity_hu(vol, mask), Unit::Hu};
  if (fn == "mass_volume_mm3") return Quantity{mass_volume_mm3(mask), Unit::Mm3};
  if (fn == "border_thickness_mm") return Quantity{border_thickness_mm(mask), Unit::Mm};
  throw ExecutionError("no implementation for measure function '" + fn + "'");
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

class Interpreter {
 public:
  Interpreter(const Plan& plan, const GuidelineTree& tree, const Volume& vol, const PatientRecord& patient,
              const ExecutionProviders& providers)
      : plan_(plan), tree_(tree), vol_(vol), patient_(patient), providers_(providers) {}

  CaseResult run() {
    if (!(plan_.tree_ref == TreeRef{tree_.organ, tree_.version})) {
      throw ExecutionError("plan targets " + plan_.tree_ref.organ + "@" + plan_.tree_ref.version + ", tree is " +
                           tree_.organ + "@" + tree_.version);
    }
    result_.plan_id = plan_.plan_id;
    for (const auto& step : plan_.steps) {
      const auto start = std::chrono::steady_clock::now();
      TraceEvent ev;
      ev.step_id = step.id;
      ev.kind = to_string(step.kind());
      ev.inputs = join(step.inputs, ", ");
      try {
        ev.output = run_step(step);
      } catch (const Error& e) {
        throw CaseFailed(e, step.id, result_.trace);
      }
      ev.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      result_.trace.push_back(std::move(ev));
    }
    if (!aggregated_) throw ExecutionError("plan has no aggregate step");
    return std::move(result_);
  }

 private:
  template <typename T>
  const T& input(const Step& step, std::size_t k) {
    if (k >= step.inputs.size()) throw ExecutionError("step " + step.id + " lacks input " + std::to_string(k));
    auto it = env_.find(step.inputs[k]);
    if (it == env_.end() || !std::holds_alternative<T>(it->second)) {
      throw ExecutionError("step " + step.id + ": input '" + step.inputs[k] + "' is unavailable or mistyped");
    }
    return std::get<T>(it->second);
  }

  std::string run_step(const Step& step) {
    switch (step.kind()) {
      case StepKind::SegmentOrgan: {
        Mask organ = segment_organ(vol_, std::get<SegmentOrganStep>(step.action).params);
        const std::string out = "organ voxels=" + std::to_string(organ.popcount());
        env_.insert_or_assign(step.id, std::move(organ));
        return out;
      }
      case StepKind::SegmentMasses: {
        const Mask& organ = input<Mask>(step, 1);
        auto set = std::make_shared<const LesionSet>(
            segment_masses(vol_, organ, std::get<SegmentMassesStep>(step.action).params, tree_.organ));
        std::vector<std::string> ids;
        for (const auto& l : set->lesions) ids.push_back(std::to_string(l.lesion_id));
        const std::string out = "lesions=" + std::to_string(set->lesions.size()) + (ids.empty() ? "" : " [" + join(ids, ", ") + "]");
        LesionTable table{set, std::vector<AttributeMap>(set->lesions.size())};
        env_.insert_or_assign(step.id, std::move(table));
        return out;
      }
      case StepKind::MeasureEach: {
        const auto& m = std::get<MeasureEachStep>(step.action);
        LesionTable table = input<LesionTable>(step, 1);
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < table.attrs.size(); ++i) {
          const LesionRecord& lesion = table.set->lesions[i];
          TypedValue v = run_measure(step.function, vol_, lesion.mask, m.method);
          parts.push_back(std::to_string(lesion.lesion_id) + ": " + render(v));
          table.attrs[i].bind(m.attr, std::move(v));
        }
        env_.insert_or_assign(step.id, std::move(table));
        return m.attr + " {" + join(parts, ", ") + "}";
      }
      case StepKind::ClassifyEach: {
        const auto& c = std::get<ClassifyEachStep>(step.action);
        if (!providers_.labeler) throw ExecutionError("no labeler configured for " + c.attr);
        LesionTable table = input<LesionTable>(step, 1);
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < table.attrs.size(); ++i) {
          const LesionRecord& lesion = table.set->lesions[i];
          const std::string subject =
              lesion_subject(tree_.organ, diameter_feret_mm(lesion.mask) / 10.0, mean_intensity_hu(vol_, lesion.mask));
          LabelResult r = providers_.labeler->classify(subject, c.labels);
          parts.push_back(std::to_string(lesion.lesion_id) + ": " + r.label);
          table.attrs[i].bind(c.attr, Category{r.label});
        }
        env_.insert_or_assign(step.id, std::move(table));
        return c.attr + " {" + join(parts, ", ") + "}";
      }
      case StepKind::AssessPatient: {
        const auto& a = std::get<AssessPatientStep>(step.action);
        std::vector<PatientRule> rules;
        for (const auto& name : a.rules) {
          auto it = std::find_if(tree_.risk_rules.begin(), tree_.risk_rules.end(),
                                 [&](const PatientRule& r) { return r.output_attr == name; });
          if (it == tree_.risk_rules.end()) throw ExecutionError("tree has no patient rule '" + name + "'");
          rules.push_back(*it);
        }
        AttributeMap attrs = assess_patient(rules, patient_);
        std::vector<std::string> parts;
        for (const auto& [k, v] : attrs) parts.push_back(k + "=" + render(v));
        result_.patient_attrs.merge(attrs);
        env_.insert_or_assign(step.id, std::move(attrs));
        return join(parts, ", ");
      }
      case StepKind::EvaluateTree: {
        const LesionTable& table = input<LesionTable>(step, 0);
        AttributeMap patient_attrs;
        if (step.inputs.size() > 1) patient_attrs = input<AttributeMap>(step, 1);
        std::vector<LesionOutcome> outcomes;
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < table.attrs.size(); ++i) {
          LesionOutcome o;
          o.lesion_id = table.set->lesions[i].lesion_id;
          o.attributes = table.attrs[i];
          AttributeMap all = table.attrs[i];
          all.merge(patient_attrs);
          o.path = execute_tree(tree_, all);
          o.trajectory = path_text(tree_, o.path);
          o.recommendation = o.path.recommendation;
          o.severity = tree_.find(o.path.leaf_id)->leaf().severity;
          parts.push_back(std::to_string(o.lesion_id) + " -> " + o.path.leaf_id);
          outcomes.push_back(std::move(o));
        }
        result_.per_lesion = outcomes;
        env_.insert_or_assign(step.id, std::move(outcomes));
        return parts.empty() ? "no lesions" : join(parts, ", ");
      }
      case StepKind::Aggregate: {
        const auto& outcomes = input<std::vector<LesionOutcome>>(step, 0);
        AggregatedResult agg = aggregate_recommendations(outcomes, tree_);
        result_.aggregated = agg;
        aggregated_ = true;
        const std::string out = agg.path.leaf_id + " severity=" + std::to_string(agg.severity);
        env_.insert_or_assign(step.id, std::move(agg));
        return out;
      }
    }
    return "";
  }

  const Plan& plan_;
  const GuidelineTree& tree_;
  const Volume& vol_;
  const PatientRecord& patient_;
  const ExecutionProviders& providers_;
  std::map<std::string, Value> env_;
  CaseResult result_;
  bool aggregated_ = false;
};

}  // namespace

CaseResult execute_plan(const Plan& plan, const GuidelineTree& tree, const Volume& vol, const PatientRecord& patient,
                        const ExecutionProviders& providers) {
  return Interpreter(plan, tree, vol, patient, providers).run();
}

}  // namespace ifct
