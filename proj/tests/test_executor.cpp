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

#include "ifct/error.hpp"
#include "ifct/executor.hpp"
#include "ifct/phantom.hpp"
#include "ifct/planner.hpp"
#include "support.hpp"

namespace ifct {
namespace {

using nlohmann::ordered_json;
using testing::shipped_tree;

Predicate pred(const char* text) { return predicate_from_json(ordered_json::parse(text)); }

AttributeMap diameter(double cm) {
  AttributeMap m;
  m.bind("diameter_cm", Quantity{cm, Unit::Cm});
  return m;
}

PatientRecord patient(bool high_risk) {
  PatientRecord p;
  p.patient_id = "p1";
  p.age_years = 60;
  p.sex = "F";
  p.flags["known_malignancy"] = high_risk;
  p.flags["cirrhosis"] = false;
  return p;
}

SyntheticSpec liver_spec(std::vector<LesionSpec> lesions, bool high_risk) {
  const PhantomProfile prof = phantom_profile("liver");
  SyntheticSpec s;
  s.seed = 1;
  s.organ = "liver";
  s.dims = prof.dims;
  s.spacing = prof.spacing;
  s.background_hu = prof.background_hu;
  s.organ_hu = prof.organ_hu;
  s.organ_radius_mm = prof.organ_radius_mm;
  s.lesions = std::move(lesions);
  s.patient = patient(high_risk);
  return s;
}

ExecutionProviders band_providers(const std::string& organ) {
  return {std::make_shared<EmbeddingLabeler>(std::make_shared<IntensityBandProvider>(phantom_profile(organ).bands))};
}

TEST(Predicates, Examples) {
  EXPECT_EQ(evaluate_predicate(pred(R"({"op": "le", "attr": "diameter_cm", "value": 1.0, "unit": "cm"})"), diameter(1.0)),
            "true");
  const auto range = pred(R"({"op": "in_range", "attr": "diameter_cm", "lo": 1.0, "hi": 1.5, "unit": "cm"})");
  EXPECT_EQ(evaluate_predicate(range, diameter(1.0)), "false");
  EXPECT_EQ(evaluate_predicate(range, diameter(1.2)), "true");
  EXPECT_EQ(evaluate_predicate(range, diameter(1.5)), "true");

  AttributeMap ab;
  ab.bind("a", false);
  ab.bind("b", false);
  const auto nor = pred(R"({"op": "not", "arg": {"op": "or", "args": [
      {"op": "eq", "attr": "a", "value": true}, {"op": "eq", "attr": "b", "value": true}]}})");
  EXPECT_EQ(evaluate_predicate(nor, ab), "true");
}

TEST(Predicates, UnitsTypesAndMissing) {
  AttributeMap mm;
  mm.bind("diameter_cm", Quantity{10.0, Unit::Mm});
  EXPECT_EQ(evaluate_predicate(pred(R"({"op": "le", "attr": "diameter_cm", "value": 1.0, "unit": "cm"})"), mm), "true");
  AttributeMap hu;
  hu.bind("diameter_cm", Quantity{10.0, Unit::Hu});
  EXPECT_THROW(evaluate_predicate(pred(R"({"op": "le", "attr": "diameter_cm", "value": 1.0, "unit": "cm"})"), hu),
               UnitMismatch);
  AttributeMap cat;
  cat.bind("risk", Category{"Low"});
  EXPECT_EQ(evaluate_predicate(pred(R"({"op": "category_of", "attr": "risk"})"), cat), "Low");
  EXPECT_THROW(evaluate_predicate(pred(R"({"op": "le", "attr": "risk", "value": 1.0})"), cat), TypeMismatch);
  EXPECT_THROW(evaluate_predicate(pred(R"({"op": "category_of", "attr": "size"})"), cat), MissingAttribute);
}

TEST(ExecuteTree, MinimalTree) {
  const auto tree = parse_guideline(testing::minimal_tree_doc());
  const auto p = execute_tree(tree, diameter(0.5));
  EXPECT_EQ(p.steps.size(), 1u);
  EXPECT_EQ(p.leaf_id, "a");
  try {
    execute_tree(tree, AttributeMap{});
    FAIL() << "expected MissingAttribute";
  } catch (const MissingAttribute& e) {
    EXPECT_NE(std::string(e.what()).find("n0"), std::string::npos);
  }
}

TEST(ExecuteTree, LiverSmallLesionBranches) {
  const auto tree = shipped_tree("liver");
  auto attrs = [](double cm, const char* risk) {
    AttributeMap m = diameter(cm);
    m.bind("mass_present", true);
    m.bind("imaging_features", Category{"benign"});
    m.bind("risk", Category{risk});
    return m;
  };
  EXPECT_EQ(execute_tree(tree, attrs(0.8, "Low")).recommendation, "Benign; no further follow-up.");
  EXPECT_EQ(execute_tree(tree, attrs(0.8, "High")).recommendation, "Liver MRI in 3--6 months.");
  EXPECT_EQ(execute_tree(tree, attrs(1.0, "Low")).steps.at(1), (PathStep{"n1", "true"}));
  const auto mid = execute_tree(tree, attrs(1.2, "Low"));
  EXPECT_EQ(mid.steps.at(1), (PathStep{"n1", "false"}));
  EXPECT_EQ(mid.steps.at(2), (PathStep{"n3", "true"}));
}

TEST(AssessPatient, RulesAndDefaults) {
  const auto tree = shipped_tree("liver");
  EXPECT_EQ(*assess_patient(tree.risk_rules, patient(true)).find("risk"), TypedValue{Category{"High"}});
  EXPECT_EQ(*assess_patient(tree.risk_rules, patient(false)).find("risk"), TypedValue{Category{"Low"}});

  PatientRule second{"band", {{pred(R"({"op": "ge", "attr": "age_years", "value": 65, "unit": "years"})"), "old"}},
                     "young"};
  std::vector<PatientRule> rules = tree.risk_rules;
  rules.push_back(second);
  const auto out = assess_patient(rules, patient(false));
  EXPECT_EQ(out.size(), 2u);
  EXPECT_EQ(*out.find("band"), TypedValue{Category{"young"}});
}

TEST(PatientRecordTest, ValidationAndJson) {
  PatientRecord p = patient(true);
  EXPECT_EQ(patient_from_json(to_json(p)), p);
  p.age_years = 151;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.age_years = 40;
  p.phase = "delayed";
  EXPECT_THROW(p.validate(), InvalidArgument);
  EXPECT_THROW(patient_from_json(ordered_json::array()), SchemaError);
}

LesionOutcome outcome(int id, int severity, const std::string& rec) {
  LesionOutcome o;
  o.lesion_id = id;
  o.severity = severity;
  o.recommendation = rec;
  return o;
}

TEST(Aggregate, MaxSeverityLowestIdWins) {
  const auto tree = shipped_tree("liver");
  const auto none = aggregate_recommendations({}, tree);
  EXPECT_EQ(none.recommendation, "No liver mass; no follow-up.");
  EXPECT_FALSE(none.source_lesion_id.has_value());

  const auto r = aggregate_recommendations({outcome(1, 0, "x"), outcome(2, 3, "y"), outcome(3, 3, "z")}, tree);
  EXPECT_EQ(r.recommendation, "y");
  EXPECT_EQ(r.source_lesion_id, 2);
  EXPECT_EQ(aggregate_recommendations({outcome(7, 1, "only")}, tree).recommendation, "only");

  const auto minimal = parse_guideline(testing::minimal_tree_doc());
  EXPECT_THROW(aggregate_recommendations({}, minimal), NoLesionLeafUndefined);
}

class ExecutePlan : public ::testing::Test {
 protected:
  GuidelineTree tree = shipped_tree("liver");
  Plan plan = synthesize_plan(tree, FunctionRegistry::defaults());
};

TEST_F(ExecutePlan, NoLesions) {
  const auto c = gen_case(liver_spec({}, false), tree);
  const auto r = execute_plan(plan, tree, c.volume, c.patient, band_providers("liver"));
  EXPECT_TRUE(r.per_lesion.empty());
  EXPECT_EQ(r.aggregated.recommendation, "No liver mass; no follow-up.");
  EXPECT_EQ(r.trace.size(), plan.steps.size());
}

TEST_F(ExecutePlan, SmallLowRiskLesion) {
  const auto c = gen_case(liver_spec({{{30.0, 33.0, 33.0}, 7.0, 0}}, false), tree);
  const auto r = execute_plan(plan, tree, c.volume, c.patient, band_providers("liver"));
  ASSERT_EQ(r.per_lesion.size(), 1u);
  EXPECT_EQ(r.aggregated.recommendation, "Benign; no further follow-up.");
  EXPECT_EQ(r.aggregated.path, c.oracle);
}

TEST_F(ExecutePlan, TwoLesionsMatchManualAggregation) {
  const auto c = gen_case(liver_spec({{{18.0, 33.0, 33.0}, 7.0, 0}, {{44.0, 33.0, 33.0}, 25.0, 30}}, true), tree);
  const auto r = execute_plan(plan, tree, c.volume, c.patient, band_providers("liver"));
  ASSERT_EQ(r.per_lesion.size(), 2u);
  const LesionOutcome* best = nullptr;
  for (const auto& l : r.per_lesion) {
    AttributeMap all = l.attributes;
    all.merge(r.patient_attrs);
    const auto manual = execute_tree(tree, all);
    EXPECT_EQ(manual, l.path);
    EXPECT_TRUE(path_in_tree(tree, l.path));
    EXPECT_EQ(l.trajectory, path_text(tree, l.path));
    const int sev = tree.find(manual.leaf_id)->leaf().severity;
    EXPECT_EQ(l.severity, sev);
    if (!best || sev > best->severity || (sev == best->severity && l.lesion_id < best->lesion_id)) best = &l;
  }
  EXPECT_EQ(r.aggregated.recommendation, best->recommendation);
  EXPECT_EQ(r.aggregated.severity, best->severity);
  EXPECT_EQ(r.aggregated.source_lesion_id, best->lesion_id);
  EXPECT_EQ(r.aggregated.path, c.oracle);
}

TEST_F(ExecutePlan, DeterministicAndRoundTrips) {
  const auto c = gen_case(sample_spec(tree, 77), tree);
  const auto a = execute_plan(plan, tree, c.volume, c.patient, band_providers("liver"));
  const auto b = execute_plan(plan, tree, c.volume, c.patient, band_providers("liver"));
  const std::string text = serialize_case_result(a);
  EXPECT_EQ(serialize_case_result(b), text);
  EXPECT_EQ(serialize_case_result(parse_case_result(text)), text);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].step_id, b.trace[i].step_id);
}

TEST_F(ExecutePlan, MissingLabelerAbortsWithTrace) {
  const auto c = gen_case(liver_spec({{{30.0, 33.0, 33.0}, 7.0, 0}}, false), tree);
  try {
    execute_plan(plan, tree, c.volume, c.patient, ExecutionProviders{});
    FAIL() << "expected CaseFailed";
  } catch (const CaseFailed& e) {
    EXPECT_FALSE(e.step_id().empty());
    EXPECT_FALSE(e.trace().empty());
  }
}

TEST_F(ExecutePlan, CentimetreAndMillimetreTreesAgree) {
  const auto cm = parse_guideline(testing::minimal_tree_doc("cm", 1.0));
  const auto mm = parse_guideline(testing::minimal_tree_doc("mm", 10.0));
  const auto reg = FunctionRegistry::defaults();
  const Plan pcm = synthesize_plan(cm, reg);
  const Plan pmm = synthesize_plan(mm, reg);
  for (double d : {6.0, 7.0, 12.5, 17.5, 25.0}) {
    const auto c = gen_case(liver_spec({{{33.0, 33.0, 33.0}, d, 0}}, false), tree);
    const auto a = execute_plan(pcm, cm, c.volume, c.patient, {});
    const auto b = execute_plan(pmm, mm, c.volume, c.patient, {});
    ASSERT_EQ(a.per_lesion.size(), 1u);
    ASSERT_EQ(b.per_lesion.size(), 1u);
    EXPECT_EQ(a.per_lesion[0].path, b.per_lesion[0].path) << d;
    EXPECT_EQ(a.per_lesion[0].path.leaf_id, d <= 10.0 ? "a" : "b") << d;
  }
}

TEST(LesionSubject, CanonicalText) {
  EXPECT_EQ(lesion_subject("liver", 0.8, 12.0), "organ=liver; diameter_cm=0.80; mean_hu=12.0");
  EXPECT_EQ(lesion_subject("renal", 1.234, -3.26), "organ=renal; diameter_cm=1.23; mean_hu=-3.3");
}

}  // namespace
}  // namespace ifct
