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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifct/embedding.hpp"
#include "ifct/guideline.hpp"
#include "ifct/labeler.hpp"
#include "ifct/phantom.hpp"
#include "ifct/plan.hpp"

namespace ifct {

struct ClassMetrics {
  std::string cls;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct CaseError {
  std::string case_id;
  std::string error;
};

struct EvalResult {
  std::string mode;
  std::size_t n_cases = 0;
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  double explanation_accuracy = 0.0;
  std::vector<ClassMetrics> per_class;  // sorted by class name
  std::vector<CaseError> errors;
};

nlohmann::ordered_json to_json(const EvalResult& result);
/// "mode,n,accuracy,weighted_f1,explanation_accuracy" with 4 decimals.
std::string csv_line(const EvalResult& result);
inline constexpr const char* kCsvHeader = "mode,n,accuracy,weighted_f1,explanation_accuracy";

/// Leaf-level accuracy and support-weighted F1 (0/0 counts as 0), plus the
/// fraction of cases whose full step sequence matches.
EvalResult compute_metrics(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                           const std::vector<DecisionPath>& pred_paths, const std::vector<DecisionPath>& truth_paths);

/// Picks, per stated lesion, the path with the most steps consistent with the
/// facts; a step contradicting a stated fact rules its path out, and a step
/// over an unstated attribute counts as neither. Ties go to the earlier path.
/// Lesion paths are then aggregated by severity; no lesions map to the
/// no-lesion leaf.
DecisionPath match_report_to_path(const GuidelineTree& tree, const ReportFacts& facts);

/// Where the patient description goes when scoring paths.
enum class BackgroundPlacement { PathText, Query };

/// Argmax cosine similarity between the findings text and each rendered
/// path, ties to the first path.
DecisionPath baseline_path_similarity(const GuidelineTree& tree, const std::string& facts_text,
                                      const std::string& patient_text, EmbeddingProvider& provider,
                                      BackgroundPlacement placement = BackgroundPlacement::PathText);

double random_baseline_accuracy(const GuidelineTree& tree);

/// One quantised answer a labeler can give for an attribute in ablated mode.
struct QuantBin {
  std::string label;
  TypedValue representative;
};

/// Bins for a tree attribute: threshold intervals for reals, "<attr>: no" /
/// "<attr>: yes" for booleans, the categories for category attributes.
std::vector<QuantBin> quantized_bins(const GuidelineTree& tree, const std::string& attr);

/// Index of the bin that holds `value`.
std::size_t bin_of(const GuidelineTree& tree, const std::string& attr, const TypedValue& value);

/// Subject text of an ablated-mode query.
std::string ablation_subject(const std::string& organ, const std::string& case_id, const std::string& attr);

struct BenchCase {
  std::string case_id;
  SyntheticSpec spec;
  std::shared_ptr<const Volume> volume;  // may be null outside full mode
  ReportFacts facts;
  std::vector<AttributeMap> lesion_attrs;
  std::vector<DecisionPath> lesion_paths;
  DecisionPath oracle;
  std::optional<std::size_t> oracle_lesion;
};

BenchCase make_bench_case(std::string case_id, const SyntheticSpec& spec, GeneratedCase generated);

/// Answer key holding the true bin of every ablated-mode query for a case.
std::map<std::string, std::string> ablation_answers(const GuidelineTree& tree, const BenchCase& c);

/// Builds the labeler used for one case in ablated mode.
using AblationLabelerFactory = std::function<std::shared_ptr<Labeler>(const GuidelineTree&, const BenchCase&)>;

AblationLabelerFactory perfect_ablation_labeler();
AblationLabelerFactory noisy_ablation_labeler(double flip_rate, std::uint64_t seed);
/// Every case uses the same labeler.
AblationLabelerFactory shared_ablation_labeler(std::shared_ptr<Labeler> labeler);

/// Ablated-mode prediction: no segmentation; every lesion attribute comes
/// from the labeler's choice among quantised bins.
DecisionPath ablated_prediction(const GuidelineTree& tree, const BenchCase& c, Labeler& labeler);

/// Cases are produced on demand so suites need not fit in memory.
struct CaseSource {
  std::size_t count = 0;
  std::function<BenchCase(std::size_t)> load;
};

/// In-memory suite of `count` sampled cases; case i uses seed stable_hash(i, seed).
CaseSource synthetic_source(const GuidelineTree& tree, std::size_t count, std::uint64_t seed);

enum class BenchMode { Full, Ablated, Baseline, Random };
std::string to_string(BenchMode mode);
BenchMode parse_bench_mode(const std::string& text);

struct BenchConfig {
  BenchMode mode = BenchMode::Full;
  std::optional<Plan> plan;                      // full mode; synthesised when absent
  std::shared_ptr<Labeler> labeler;              // full mode
  AblationLabelerFactory ablation_labeler;       // ablated mode
  std::shared_ptr<EmbeddingProvider> embedder;   // baseline mode
  BackgroundPlacement placement = BackgroundPlacement::PathText;
  std::uint64_t seed = 0;                        // random mode
};

/// Scores predictions against the paths matched from each case's report.
/// A case that fails counts as wrong and is listed in `errors`.
EvalResult run_benchmark(const GuidelineTree& tree, const CaseSource& source, const BenchConfig& config);

/// Labeler that reads lesion intensity through the organ's HU bands.
std::shared_ptr<Labeler> band_labeler(const std::string& organ);

// Benchmark directory: manifest.json plus case_NNNN.json / case_NNNN.ctv.
struct BenchManifest {
  std::string tree;  // path of the guideline document
  TreeRef tree_ref;
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<std::string> cases;  // case json paths, relative to the manifest
};

nlohmann::ordered_json to_json(const BenchManifest& manifest);
BenchManifest manifest_from_json(const nlohmann::ordered_json& j);
BenchManifest read_manifest(const std::filesystem::path& path);

void write_case(const std::filesystem::path& dir, const BenchCase& c);
/// Loads the case document and, when `with_volume` is set, its volume.
BenchCase read_case(const std::filesystem::path& json_path, bool with_volume);

/// Writes `count` sampled cases and the manifest; returns the manifest.
BenchManifest generate_bench(const GuidelineTree& tree, const std::string& tree_path, std::size_t count,
                             std::uint64_t seed, const std::filesystem::path& out_dir);

/// Lazily reads the cases listed in a manifest.
CaseSource manifest_source(const std::filesystem::path& manifest_path, bool with_volumes);

}  // namespace ifct
