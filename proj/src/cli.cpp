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

#include "ifct/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ifct/bench.hpp"
#include "ifct/executor.hpp"
#include "ifct/guideline.hpp"
#include "ifct/planner.hpp"
#include "ifct/registry.hpp"
#include "ifct/remote.hpp"

namespace ifct {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string document;
  std::string tree;
  std::string registry;
  std::string provider;
  std::string mode = "full";
  std::string out;
  std::uint64_t seed = 0;
  int max_iter = kDefaultMaxIterations;
  std::string method;
  std::string plan;
  std::string planner_url;
  std::string parser_url;
  std::string volume;
  std::string patient;
  std::string case_file;
  std::string manifest;
  std::string placement = "path";
  std::string facts_text;
  std::string patient_text;
  std::size_t count = 200;
  bool timing = false;
};

std::string read_text(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  write_file_bytes(o.out, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                         text.size()));
}

FunctionRegistry load_registry(const Options& o) {
  return o.registry.empty() ? FunctionRegistry::defaults() : read_registry(o.registry);
}

std::optional<SegmentationProtocol> protocol_for(const GuidelineTree& tree, const Options& o) {
  if (o.method.empty()) return std::nullopt;
  SegmentationProtocol p = default_protocol(tree.organ);
  p.diameter_method = parse_diameter_method(o.method);
  return p;
}

Plan obtain_plan(const GuidelineTree& tree, const FunctionRegistry& registry, const Options& o) {
  if (!o.plan.empty()) {
    Plan plan = read_plan(o.plan);
    ValidationReport report = validate_plan(plan, tree, registry);
    if (!report.ok()) throw ValidationFailed(std::move(report));
    return plan;
  }
  if (!o.planner_url.empty()) {
    HttpPlannerClient client(o.planner_url);
    return external_plan(tree, registry, client);
  }
  return plan_loop(tree, registry, o.max_iter, {}, protocol_for(tree, o)).plan;
}

std::string provider_url(const std::string& spec) {
  const std::string url = spec.size() > 7 ? spec.substr(7) : "";
  if (!url.empty()) return url;
  const char* env = std::getenv("IFCT_PROVIDER_URL");
  if (!env || !*env) throw InvalidArgument("remote provider needs a URL or IFCT_PROVIDER_URL");
  return env;
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw InvalidArgument("bad seed '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InvalidArgument("bad seed '" + text + "'");
  }
}

std::shared_ptr<EmbeddingProvider> embedding_provider(const std::string& spec, const std::string& organ) {
  if (spec.rfind("local:", 0) == 0) return std::make_shared<HashEmbeddingProvider>(parse_seed(spec.substr(6)));
  if (spec == "remote" || spec.rfind("remote:", 0) == 0) {
    return make_concurrency_safe(std::make_shared<RemoteEmbeddingProvider>(provider_url(spec)));
  }
  if (spec == "bands") return std::make_shared<IntensityBandProvider>(phantom_profile(organ).bands);
  throw InvalidArgument("unknown embedding provider '" + spec + "'");
}

// oracle:<flip>:<seed>
AblationLabelerFactory oracle_labeler(const std::string& spec) {
  const std::size_t a = spec.find(':');
  const std::size_t b = spec.find(':', a + 1);
  if (b == std::string::npos) throw InvalidArgument("expected oracle:<flip>:<seed>, got '" + spec + "'");
  double flip = 0.0;
  try {
    flip = std::stod(spec.substr(a + 1, b - a - 1));
  } catch (const std::logic_error&) {
    throw InvalidArgument("bad flip rate in '" + spec + "'");
  }
  const std::uint64_t seed = parse_seed(spec.substr(b + 1));
  return flip == 0.0 ? perfect_ablation_labeler() : noisy_ablation_labeler(flip, seed);
}

BackgroundPlacement parse_placement(const std::string& text) {
  if (text == "path") return BackgroundPlacement::PathText;
  if (text == "query") return BackgroundPlacement::Query;
  throw InvalidArgument("placement must be 'path' or 'query'");
}

int cmd_parse_guideline(const Options& o, std::ostream& out) {
  const std::string raw = read_text(o.document);
  GuidelineTree tree = o.parser_url.empty() ? parse_guideline(raw) : HttpParserClient(o.parser_url).parse(raw);
  emit(o, out, serialize_guideline(tree));
  return 0;
}

int cmd_validate_tree(const Options& o, std::ostream& out, std::ostream& err) {
  json doc;
  try {
    doc = json::parse(read_text(o.document));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("not a JSON document: ") + e.what());
  }
  const auto issues = validate_tree(load_guideline(doc));
  if (issues.empty()) {
    out << "ok\n";
    return 0;
  }
  for (const auto& i : issues) err << i.node_id << ": " << i.rule << ": " << i.detail << "\n";
  err << "SchemaError: " << issues.size() << " issue(s)\n";
  return 1;
}

int cmd_enumerate_paths(const Options& o, std::ostream& out) {
  const GuidelineTree tree = read_guideline(o.document);
  std::string text;
  for (const auto& p : enumerate_paths(tree)) text += path_text(tree, p) + "\n";
  emit(o, out, text);
  return 0;
}

int cmd_plan(const Options& o, std::ostream& out, std::ostream& err) {
  const GuidelineTree tree = read_guideline(o.tree);
  const FunctionRegistry registry = load_registry(o);
  if (!o.planner_url.empty()) {
    HttpPlannerClient client(o.planner_url);
    emit(o, out, serialize_plan(external_plan(tree, registry, client)));
    return 0;
  }
  const PlanLoopResult r = plan_loop(tree, registry, o.max_iter, {}, protocol_for(tree, o));
  err << "plan accepted after " << r.iterations << " validation(s)\n";
  emit(o, out, serialize_plan(r.plan));
  return 0;
}

int cmd_validate_plan(const Options& o, std::ostream& out) {
  const GuidelineTree tree = read_guideline(o.tree);
  const Plan plan = read_plan(o.document);
  ValidationReport report = validate_plan(plan, tree, load_registry(o));
  out << to_json(report).dump(2) << "\n";
  if (!report.ok()) throw ValidationFailed(std::move(report));
  return 0;
}

int cmd_run_case(const Options& o, std::ostream& out) {
  const GuidelineTree tree = read_guideline(o.tree);
  const FunctionRegistry registry = load_registry(o);
  const Plan plan = obtain_plan(tree, registry, o);
  std::optional<Volume> volume;
  PatientRecord patient;
  if (!o.case_file.empty()) {
    BenchCase c = read_case(o.case_file, true);
    volume.emplace(*c.volume);
    patient = c.spec.patient;
  } else {
    if (o.volume.empty() || o.patient.empty()) throw InvalidArgument("run-case needs --case or --volume and --patient");
    volume.emplace(read_volume(o.volume));
    json pj;
    try {
      pj = json::parse(read_text(o.patient));
    } catch (const json::exception& e) {
      throw SchemaError(std::string("patient file: ") + e.what());
    }
    patient = patient_from_json(pj);
  }
  ExecutionProviders providers;
  if (o.provider.empty()) {
    providers.labeler = band_labeler(tree.organ);
  } else {
    providers.labeler = std::make_shared<EmbeddingLabeler>(embedding_provider(o.provider, tree.organ));
  }
  const CaseResult result = execute_plan(plan, tree, *volume, patient, providers);
  emit(o, out, serialize_case_result(result, o.timing));
  return 0;
}

int cmd_gen_bench(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw InvalidArgument("gen-bench needs --out <directory>");
  const GuidelineTree tree = read_guideline(o.tree);
  const BenchManifest m = generate_bench(tree, fs::absolute(o.tree).string(), o.count, o.seed, o.out);
  out << "wrote " << m.cases.size() << " cases to " << o.out << "\n";
  return 0;
}

GuidelineTree manifest_tree(const Options& o, const BenchManifest& m) {
  if (!o.tree.empty()) return read_guideline(o.tree);
  fs::path p = m.tree;
  if (p.is_relative() && !fs::exists(p)) p = fs::path(o.manifest).parent_path() / p;
  return read_guideline(p.string());
}

int evaluate(const Options& o, BenchMode mode, std::ostream& out) {
  if (o.manifest.empty()) throw InvalidArgument("--manifest is required");
  const BenchManifest m = read_manifest(o.manifest);
  const GuidelineTree tree = manifest_tree(o, m);
  if (!(m.tree_ref == TreeRef{tree.organ, tree.version})) {
    throw InvalidArgument("manifest targets " + m.tree_ref.organ + "@" + m.tree_ref.version);
  }
  BenchConfig config;
  config.mode = mode;
  config.seed = o.seed;
  config.placement = parse_placement(o.placement);
  switch (mode) {
    case BenchMode::Full:
      config.plan = obtain_plan(tree, load_registry(o), o);
      config.labeler =
          std::make_shared<EmbeddingLabeler>(embedding_provider(o.provider.empty() ? "bands" : o.provider, tree.organ));
      break;
    case BenchMode::Ablated: {
      const std::string spec = o.provider.empty() ? "oracle:0.3:" + std::to_string(o.seed) : o.provider;
      if (spec.rfind("oracle:", 0) == 0) {
        config.ablation_labeler = oracle_labeler(spec);
      } else {
        config.ablation_labeler =
            shared_ablation_labeler(std::make_shared<EmbeddingLabeler>(embedding_provider(spec, tree.organ)));
      }
      break;
    }
    case BenchMode::Baseline:
      config.embedder =
          embedding_provider(o.provider.empty() ? "local:" + std::to_string(o.seed) : o.provider, tree.organ);
      break;
    case BenchMode::Random:
      break;
  }
  const EvalResult r = run_benchmark(tree, manifest_source(o.manifest, mode == BenchMode::Full), config);
  char line[160];
  std::snprintf(line, sizeof line, "accuracy %.3f\nweighted_f1 %.3f\nexplanation_accuracy %.3f\nerrors %zu\n",
                r.accuracy, r.weighted_f1, r.explanation_accuracy, r.errors.size());
  out << line << kCsvHeader << "\n" << csv_line(r) << "\n";
  if (!o.out.empty()) {
    const std::string text = to_json(r).dump(2) + "\n";
    write_file_bytes(o.out, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                          text.size()));
  }
  return 0;
}

int cmd_baseline(const Options& o, std::ostream& out) {
  if (!o.manifest.empty()) return evaluate(o, BenchMode::Baseline, out);
  if (o.tree.empty()) throw InvalidArgument("baseline needs --manifest, or --tree with --facts");
  const GuidelineTree tree = read_guideline(o.tree);
  auto provider = embedding_provider(o.provider.empty() ? "local:" + std::to_string(o.seed) : o.provider, tree.organ);
  const DecisionPath p =
      baseline_path_similarity(tree, o.facts_text, o.patient_text, *provider, parse_placement(o.placement));
  emit(o, out, path_text(tree, p) + "\n");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guideline-driven incidental finding engine"};
  app.name("ifct");
  app.require_subcommand(1);
  Options o;

  auto* parse = app.add_subcommand("parse-guideline", "Parse and validate a guideline document");
  parse->add_option("document", o.document, "Guideline document")->required();
  parse->add_option("--parser-url", o.parser_url, "Structuring service for raw guideline text");
  parse->add_option("--out", o.out, "Output file");

  auto* vtree = app.add_subcommand("validate-tree", "List invariant violations of a guideline document");
  vtree->add_option("document", o.document, "Guideline document")->required();

  auto* paths = app.add_subcommand("enumerate-paths", "Print every root-to-leaf path");
  paths->add_option("document", o.document, "Guideline document")->required();
  paths->add_option("--out", o.out, "Output file");

  auto* plan = app.add_subcommand("plan", "Synthesise and validate an execution plan");
  plan->add_option("--tree", o.tree, "Guideline document")->required();
  plan->add_option("--registry", o.registry, "Function registry manifest");
  plan->add_option("--max-iter", o.max_iter, "Validation rounds before giving up")->check(CLI::PositiveNumber);
  plan->add_option("--method", o.method, "Diameter estimator")->check(CLI::IsMember({"feret", "equiv_sphere", "bbox"}));
  plan->add_option("--planner-url", o.planner_url, "Remote planner endpoint");
  plan->add_option("--out", o.out, "Output file");

  auto* vplan = app.add_subcommand("validate-plan", "Check a plan against a tree and registry");
  vplan->add_option("document", o.document, "Plan document")->required();
  vplan->add_option("--tree", o.tree, "Guideline document")->required();
  vplan->add_option("--registry", o.registry, "Function registry manifest");

  auto* run = app.add_subcommand("run-case", "Execute a plan on one case");
  run->add_option("--tree", o.tree, "Guideline document")->required();
  run->add_option("--registry", o.registry, "Function registry manifest");
  run->add_option("--plan", o.plan, "Plan document (synthesised when absent)");
  run->add_option("--case", o.case_file, "Benchmark case document");
  run->add_option("--volume", o.volume, "CTV1 volume");
  run->add_option("--patient", o.patient, "Patient record document");
  run->add_option("--provider", o.provider, "bands | local:<seed> | remote[:<url>]");
  run->add_option("--max-iter", o.max_iter, "Validation rounds before giving up")->check(CLI::PositiveNumber);
  run->add_option("--method", o.method, "Diameter estimator")->check(CLI::IsMember({"feret", "equiv_sphere", "bbox"}));
  run->add_flag("--timing", o.timing, "Include step wall times");
  run->add_option("--out", o.out, "Output file");

  auto* gen = app.add_subcommand("gen-bench", "Generate a synthetic benchmark suite");
  gen->add_option("--tree", o.tree, "Guideline document")->required();
  gen->add_option("--n", o.count, "Number of cases")->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "Suite seed");
  gen->add_option("--out", o.out, "Output directory")->required();

  auto* eval = app.add_subcommand("evaluate", "Score a benchmark suite");
  eval->add_option("--manifest", o.manifest, "Benchmark manifest")->required();
  eval->add_option("--mode", o.mode, "Pipeline variant")->check(CLI::IsMember({"full", "ablated", "baseline", "random"}));
  eval->add_option("--tree", o.tree, "Guideline document (overrides the manifest)");
  eval->add_option("--registry", o.registry, "Function registry manifest");
  eval->add_option("--plan", o.plan, "Plan document (synthesised when absent)");
  eval->add_option("--provider", o.provider, "bands | local:<seed> | remote[:<url>] | oracle:<flip>:<seed>");
  eval->add_option("--seed", o.seed, "Seed for random choices");
  eval->add_option("--max-iter", o.max_iter, "Validation rounds before giving up")->check(CLI::PositiveNumber);
  eval->add_option("--method", o.method, "Diameter estimator")->check(CLI::IsMember({"feret", "equiv_sphere", "bbox"}));
  eval->add_option("--placement", o.placement, "Patient text placement for the baseline: path | query");
  eval->add_option("--out", o.out, "EvalResult output file");

  auto* base = app.add_subcommand("baseline", "Path-similarity baseline on a suite or a single report");
  base->add_option("--manifest", o.manifest, "Benchmark manifest");
  base->add_option("--tree", o.tree, "Guideline document");
  base->add_option("--facts", o.facts_text, "Findings text");
  base->add_option("--patient-text", o.patient_text, "Patient background text");
  base->add_option("--provider", o.provider, "local:<seed> | remote[:<url>]");
  base->add_option("--seed", o.seed, "Seed of the default hash provider");
  base->add_option("--placement", o.placement, "Patient text placement: path | query");
  base->add_option("--out", o.out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*parse) return cmd_parse_guideline(o, out);
    if (*vtree) return cmd_validate_tree(o, out, err);
    if (*paths) return cmd_enumerate_paths(o, out);
    if (*plan) return cmd_plan(o, out, err);
    if (*vplan) return cmd_validate_plan(o, out);
    if (*run) return cmd_run_case(o, out);
    if (*gen) return cmd_gen_bench(o, out);
    if (*eval) return evaluate(o, parse_bench_mode(o.mode), out);
    if (*base) return cmd_baseline(o, out);
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "Error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ifct
