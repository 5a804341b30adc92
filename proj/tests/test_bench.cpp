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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "ifct/bench.hpp"
#include "ifct/error.hpp"
#include "ifct/geometry.hpp"
#include "support.hpp"

namespace ifct {
namespace {

using nlohmann::ordered_json;
using testing::shipped_tree;

DecisionPath leaf_path(const std::string& leaf) { return DecisionPath{{{"n0", leaf}}, leaf, leaf}; }

std::vector<DecisionPath> leaf_paths(const std::vector<std::string>& leaves) {
  std::vector<DecisionPath> out;
  for (const auto& l : leaves) out.push_back(leaf_path(l));
  return out;
}

EvalResult metrics(const std::vector<std::string>& preds, const std::vector<std::string>& truths) {
  return compute_metrics(preds, truths, leaf_paths(preds), leaf_paths(truths));
}

// Per-class counts straight from the definitions, independent of the library.
struct OracleMetrics {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::map<std::string, double> f1;
};

OracleMetrics oracle_metrics(const std::vector<std::string>& preds, const std::vector<std::string>& truths) {
  OracleMetrics m;
  const double n = static_cast<double>(preds.size());
  std::set<std::string> classes(preds.begin(), preds.end());
  classes.insert(truths.begin(), truths.end());
  for (std::size_t i = 0; i < preds.size(); ++i) m.accuracy += preds[i] == truths[i];
  m.accuracy /= n;
  for (const auto& c : classes) {
    double tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool p = preds[i] == c, t = truths[i] == c;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
      support += t;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    m.f1[c] = f1;
    m.weighted_f1 += support / n * f1;
  }
  return m;
}

TEST(Metrics, HandComputedExample) {
  const auto r = metrics({"A", "B", "B", "B", "B"}, {"A", "A", "B", "B", "B"});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.8);
  EXPECT_NEAR(r.weighted_f1, 0.7809, 1e-4);
  ASSERT_EQ(r.per_class.size(), 2u);
  EXPECT_NEAR(r.per_class[0].f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.per_class[1].f1, 6.0 / 7.0, 1e-12);
  EXPECT_EQ(r.per_class[1].support, 3u);
}

TEST(Metrics, PerfectPredictions) {
  const auto r = metrics({"x", "y", "z"}, {"x", "y", "z"});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.weighted_f1, 1.0);
  EXPECT_EQ(r.explanation_accuracy, 1.0);
}

TEST(Metrics, ExplanationComparesWholePaths) {
  std::vector<DecisionPath> pred = leaf_paths({"a", "b"});
  pred[1].steps[0].branch = "other";
  const auto r = compute_metrics({"a", "b"}, {"a", "b"}, pred, leaf_paths({"a", "b"}));
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.explanation_accuracy, 0.5);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(metrics({"a"}, {"a", "b"}), LengthMismatch);
  EXPECT_THROW(metrics({}, {}), EmptyInput);
}

TEST(Metrics, FuzzAgainstBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 40, k = 1 + rng() % 6;
    std::vector<std::string> preds, truths;
    for (std::size_t i = 0; i < n; ++i) {
      truths.push_back("c" + std::to_string(rng() % k));
      preds.push_back(rng() % 3 == 0 ? truths.back() : "c" + std::to_string(rng() % k));
    }
    const auto r = metrics(preds, truths);
    const auto o = oracle_metrics(preds, truths);
    EXPECT_NEAR(r.accuracy, o.accuracy, 1e-9);
    EXPECT_NEAR(r.weighted_f1, o.weighted_f1, 1e-9);
    EXPECT_GE(r.weighted_f1, 0.0);
    EXPECT_LE(r.weighted_f1, 1.0);
    for (const auto& c : r.per_class) EXPECT_NEAR(c.f1, o.f1.at(c.cls), 1e-9) << c.cls;
    EXPECT_EQ(r.accuracy == 1.0, preds == truths);
    EXPECT_EQ(r.weighted_f1 == 1.0, preds == truths);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> p2, t2;
    for (auto i : order) {
      p2.push_back(preds[i]);
      t2.push_back(truths[i]);
    }
    EXPECT_EQ(to_json(metrics(p2, t2)), to_json(r));
  }
}

TEST(Metrics, CsvLine) {
  auto r = metrics({"A", "B", "B", "B", "B"}, {"A", "A", "B", "B", "B"});
  r.mode = "full";
  EXPECT_EQ(csv_line(r), "full,5,0.8000,0.7810,0.8000");
}

TEST(RandomBaseline, PathCountReciprocal) {
  EXPECT_NEAR(random_baseline_accuracy(shipped_tree("liver")), 0.100, 5e-5);
  EXPECT_NEAR(random_baseline_accuracy(shipped_tree("renal")), 0.1667, 5e-5);
  EXPECT_NEAR(random_baseline_accuracy(shipped_tree("pancreas")), 0.0714, 5e-5);
}

// One light case per leaf: nominal facts from a sampled spec, no volume.
std::vector<BenchCase> facts_per_leaf(const GuidelineTree& tree) {
  std::map<std::string, BenchCase> by_leaf;
  const auto profile = phantom_profile(tree.organ);
  for (std::uint64_t seed = 0; by_leaf.size() < enumerate_paths(tree).size() && seed < 5000; ++seed) {
    const SyntheticSpec spec = sample_spec(tree, seed);
    BenchCase c;
    c.case_id = "leaf_" + std::to_string(seed);
    c.spec = spec;
    c.facts.patient = spec.patient;
    for (const auto& l : spec.lesions) c.facts.lesions.push_back(nominal_attributes(tree, profile, l));
    by_leaf.emplace(match_report_to_path(tree, c.facts).leaf_id, std::move(c));
  }
  std::vector<BenchCase> out;
  for (auto& [leaf, c] : by_leaf) out.push_back(std::move(c));
  return out;
}

TEST(RandomBaseline, EmpiricalAccuracyMatchesExpectation) {
  const auto tree = shipped_tree("liver");
  const auto cases = facts_per_leaf(tree);
  ASSERT_EQ(cases.size(), 10u);
  CaseSource src{10000, [&](std::size_t i) { return cases[i % cases.size()]; }};
  BenchConfig cfg;
  cfg.mode = BenchMode::Random;
  cfg.seed = 11;
  const auto r = run_benchmark(tree, src, cfg);
  EXPECT_NEAR(r.accuracy, 0.100, 0.02);
  EXPECT_EQ(to_json(run_benchmark(tree, src, cfg)), to_json(r));
}

const char* kTieDoc = R"({
  "organ": "liver",
  "version": "0.3",
  "attributes": [
    {"name": "diameter_cm", "type": "real", "unit": "cm", "producer": "measure", "function": "calc_mass_diameter_cm"},
    {"name": "calcified", "type": "boolean", "producer": "measure", "function": "mass_present"},
    {"name": "kind", "type": "category", "producer": "classify", "function": "classify_label", "categories": ["x", "y"]}
  ],
  "root": "n0",
  "nodes": {
    "n0": {"kind": "decision", "text": "small", "predicate": {"op": "le", "attr": "diameter_cm", "value": 1.0, "unit": "cm"},
           "branches": {"true": "n2", "false": "n1"}},
    "n1": {"kind": "decision", "text": "calcified", "predicate": {"op": "eq", "attr": "calcified", "value": true},
           "branches": {"true": "a", "false": "b"}},
    "n2": {"kind": "decision", "text": "kind", "predicate": {"op": "category_of", "attr": "kind"},
           "branches": {"x": "c", "y": "d"}},
    "a": {"kind": "leaf", "text": "A", "recommendation": "ra", "severity": 1},
    "b": {"kind": "leaf", "text": "B", "recommendation": "rb", "severity": 2},
    "c": {"kind": "leaf", "text": "C", "recommendation": "rc", "severity": 3},
    "d": {"kind": "leaf", "text": "D", "recommendation": "rd", "severity": 4}
  }
})";

ReportFacts one_lesion(AttributeMap attrs) {
  ReportFacts f;
  f.lesions.push_back(std::move(attrs));
  return f;
}

TEST(Matcher, UnstatedAttributeTiesGoToFirstPath) {
  const auto tree = parse_guideline(kTieDoc);
  AttributeMap m;
  m.bind("diameter_cm", Quantity{2.0, Unit::Cm});
  EXPECT_EQ(match_report_to_path(tree, one_lesion(m)).leaf_id, "a");
  m.bind("calcified", false);
  EXPECT_EQ(match_report_to_path(tree, one_lesion(m)).leaf_id, "b");
}

TEST(Matcher, ContradictionRejectsEveryPath) {
  const auto tree = parse_guideline(kTieDoc);
  AttributeMap m;
  m.bind("diameter_cm", Quantity{0.5, Unit::Cm});
  m.bind("kind", Category{"z"});
  EXPECT_THROW(match_report_to_path(tree, one_lesion(m)), NoConsistentPath);
}

TEST(Matcher, RecoversGeneratingOracle) {
  for (const char* organ : {"liver", "renal", "pancreas"}) {
    const auto tree = shipped_tree(organ);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto c = gen_case(sample_spec(tree, seed), tree);
      EXPECT_EQ(match_report_to_path(tree, c.facts), c.oracle) << organ << " " << seed;
    }
  }
}

TEST(Baseline, ConstructedMatchAndSingletonTree) {
  const auto tree = shipped_tree("renal");
  const auto paths = enumerate_paths(tree);
  // Facts text equal to path 3's text with the same background: identical hash vectors.
  HashEmbeddingProvider hash(3);
  const std::string patient = "age 50";
  EXPECT_EQ(baseline_path_similarity(tree, path_text(tree, paths[3]) + "; " + patient, patient, hash), paths[3]);

  auto single = parse_guideline(testing::minimal_tree_doc());
  single.nodes[0] = single.nodes[1];
  single.nodes.erase(single.nodes.begin() + 1, single.nodes.end());
  single.root_id = single.nodes[0].id;
  ASSERT_EQ(enumerate_paths(single).size(), 1u);
  EXPECT_EQ(baseline_path_similarity(single, "anything", "", hash).leaf_id, "a");
}

TEST(Baseline, MatchesIndependentArgmax) {
  const auto tree = shipped_tree("liver");
  const auto paths = enumerate_paths(tree);
  HashEmbeddingProvider hash(17);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = gen_case(sample_spec(tree, seed), tree);
    const auto q = hash.embed(c.facts.findings_text);
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto v = hash.embed(path_text(tree, paths[i]) + "; " + c.facts.patient_text);
      double dot = 0.0;
      for (std::size_t d = 0; d < q.size(); ++d) dot += q[d] * v[d];
      if (dot > best_score) {
        best_score = dot;
        best = i;
      }
    }
    EXPECT_EQ(baseline_path_similarity(tree, c.facts.findings_text, c.facts.patient_text, hash), paths[best]);
  }
}

TEST(Quantization, BinsFollowThresholds) {
  const auto tree = shipped_tree("liver");
  const auto bins = quantized_bins(tree, "diameter_cm");
  ASSERT_EQ(bins.size(), 3u);
  EXPECT_EQ(bins[0].label, "diameter_cm: <= 1 cm");
  EXPECT_EQ(bins[1].label, "diameter_cm: 1 to 1.5 cm");
  EXPECT_EQ(bins[2].label, "diameter_cm: > 1.5 cm");
  EXPECT_EQ(bin_of(tree, "diameter_cm", Quantity{1.0, Unit::Cm}), 0u);
  EXPECT_EQ(bin_of(tree, "diameter_cm", Quantity{12.0, Unit::Mm}), 1u);
  EXPECT_EQ(bin_of(tree, "diameter_cm", Quantity{1.6, Unit::Cm}), 2u);
  for (std::size_t i = 0; i < bins.size(); ++i) EXPECT_EQ(bin_of(tree, "diameter_cm", bins[i].representative), i);
  EXPECT_EQ(quantized_bins(tree, "mass_present").size(), 2u);
}

TEST(GenCase, RejectsBadSpecs) {
  const auto tree = shipped_tree("liver");
  const auto good = sample_spec(tree, 4);
  auto bad = good;
  bad.organ = "renal";
  EXPECT_THROW(gen_case(bad, tree), SpecError);
  bad = good;
  bad.background_hu = 0;
  EXPECT_THROW(gen_case(bad, tree), SpecError);

  bad = good;
  bad.lesions = {{{33.0, 33.0, 33.0}, 10.0, 0}};  // diameter on the 1.0 cm threshold
  EXPECT_THROW(gen_case(bad, tree), SpecError);
  bad.lesions = {{{25.0, 33.0, 33.0}, 8.0, 0}, {{31.0, 33.0, 33.0}, 8.0, 0}};  // overlapping
  EXPECT_THROW(gen_case(bad, tree), SpecError);
  bad.lesions = {{{33.0, 33.0, 33.0}, 8.0, 300}};  // outside the mass window
  EXPECT_THROW(gen_case(bad, tree), SpecError);
}

TEST(GenCase, ZeroLesionsIsBackgroundAndOrgan) {
  const auto tree = shipped_tree("liver");
  auto spec = sample_spec(tree, 4);
  spec.lesions.clear();
  const auto c = gen_case(spec, tree);
  EXPECT_EQ(c.oracle.leaf_id, "l0");
  EXPECT_FALSE(c.oracle_lesion.has_value());
}

TEST(GenCase, SampleSpecIsDeterministic) {
  const auto tree = shipped_tree("pancreas");
  EXPECT_EQ(to_json(sample_spec(tree, 9)), to_json(sample_spec(tree, 9)));
  EXPECT_EQ(to_json(synthetic_spec_from_json(to_json(sample_spec(tree, 9)))), to_json(sample_spec(tree, 9)));
}

class Suite : public ::testing::Test {
 protected:
  GuidelineTree tree = shipped_tree("liver");
  CaseSource source = synthetic_source(tree, 25, 3);
};

TEST_F(Suite, FullModeIsExact) {
  const auto r = run_benchmark(tree, source, BenchConfig{});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.explanation_accuracy, 1.0);
  EXPECT_TRUE(r.errors.empty());
}

TEST_F(Suite, PerfectAblationEqualsFullNoisyFallsBehind) {
  BenchConfig cfg;
  cfg.mode = BenchMode::Ablated;
  cfg.ablation_labeler = perfect_ablation_labeler();
  EXPECT_EQ(run_benchmark(tree, source, cfg).accuracy, 1.0);
  cfg.ablation_labeler = noisy_ablation_labeler(0.3, 8);
  const auto noisy = run_benchmark(tree, source, cfg);
  EXPECT_LT(noisy.accuracy, 1.0);
  EXPECT_EQ(to_json(run_benchmark(tree, source, cfg)), to_json(noisy));
}

TEST_F(Suite, HashBaselineFallsBehind) {
  BenchConfig cfg;
  cfg.mode = BenchMode::Baseline;
  cfg.embedder = std::make_shared<HashEmbeddingProvider>(1);
  const auto r = run_benchmark(tree, source, cfg);
  EXPECT_LT(r.accuracy, 1.0);
  EXPECT_EQ(to_json(run_benchmark(tree, source, cfg)), to_json(r));
}

TEST(Manifest, GenerateAndReload) {
  const auto tree = shipped_tree("renal");
  const auto dir = std::filesystem::temp_directory_path() / "ifct_bench_manifest_test";
  std::filesystem::remove_all(dir);
  const auto m = generate_bench(tree, testing::source_path("data/guidelines/renal.json"), 4, 21, dir);
  EXPECT_EQ(m.cases.size(), 4u);
  const auto back = read_manifest(dir / "manifest.json");
  EXPECT_EQ(to_json(back), to_json(m));
  const auto src = manifest_source(dir / "manifest.json", true);
  const auto gen = synthetic_source(tree, 4, 21);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto a = src.load(i);
    const auto b = gen.load(i);
    EXPECT_EQ(a.case_id, b.case_id);
    EXPECT_EQ(a.oracle, b.oracle);
    ASSERT_TRUE(a.volume && b.volume);
    EXPECT_TRUE(*a.volume == *b.volume);
  }
  EXPECT_EQ(run_benchmark(tree, src, BenchConfig{}).accuracy, 1.0);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ifct
