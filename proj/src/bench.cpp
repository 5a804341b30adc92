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

#include "ifct/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ifct/executor.hpp"
#include "ifct/geometry.hpp"
#include "ifct/planner.hpp"
#include "ifct/registry.hpp"

namespace ifct {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

DecisionPath no_lesion_path(const GuidelineTree& tree) {
  if (!tree.no_lesion_leaf) throw NoLesionLeafUndefined("tree " + tree.organ + " declares no no-lesion leaf");
  return path_to_leaf(tree, *tree.no_lesion_leaf);
}

int severity_of(const GuidelineTree& tree, const DecisionPath& path) {
  return tree.find(path.leaf_id)->leaf().severity;
}

bool all_bound(const Predicate& pred, const AttributeMap& attrs) {
  const auto refs = referenced_attributes(pred);
  return std::all_of(refs.begin(), refs.end(), [&](const std::string& a) { return attrs.contains(a); });
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Lesion attributes queried in ablated mode: the presence attribute first,
// then the rest of the manifest order.
std::vector<const AttributeDecl*> ablation_queries(const GuidelineTree& tree) {
  std::vector<const AttributeDecl*> out;
  for (const auto& d : tree.attributes) {
    if (d.producer == Producer::Measure && d.function == "mass_present") out.push_back(&d);
  }
  for (const auto& d : tree.attributes) {
    if (d.producer == Producer::Patient) continue;
    if (d.producer == Producer::Measure && d.function == "mass_present") continue;
    out.push_back(&d);
  }
  return out;
}

const AttributeDecl& require_decl(const GuidelineTree& tree, const std::string& attr) {
  const AttributeDecl* decl = tree.attribute(attr);
  if (!decl) throw InvalidArgument("tree does not declare attribute '" + attr + "'");
  return *decl;
}

std::vector<double> sorted_thresholds(const GuidelineTree& tree, const AttributeDecl& decl) {
  std::set<double> values;
  for (const auto& q : attribute_thresholds(tree, decl.name)) values.insert(convert_unit(q.value, q.unit, decl.unit));
  return {values.begin(), values.end()};
}

std::string case_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%04zu", i);
  return buf;
}

}  // namespace

DecisionPath match_report_to_path(const GuidelineTree& tree, const ReportFacts& facts) {
  if (facts.lesions.empty()) return no_lesion_path(tree);
  const auto paths = enumerate_paths(tree);
  const AttributeMap patient_attrs = assess_patient(tree.risk_rules, facts.patient);
  std::vector<LesionOutcome> outcomes;
  for (std::size_t i = 0; i < facts.lesions.size(); ++i) {
    AttributeMap attrs = facts.lesions[i];
    for (const auto& [name, value] : patient_attrs) {
      if (!attrs.contains(name)) attrs.bind(name, value);
    }
    const DecisionPath* best = nullptr;
    int best_score = -1;
    for (const auto& path : paths) {
      int score = 0;
      bool consistent = true;
      for (const auto& step : path.steps) {
        const Predicate& pred = tree.find(step.node_id)->decision().predicate;
        if (!all_bound(pred, attrs)) continue;
        if (evaluate_predicate(pred, attrs) != step.branch) {
          consistent = false;
          break;
        }
        ++score;
      }
      if (consistent && score > best_score) {
        best = &path;
        best_score = score;
      }
    }
    if (!best) throw NoConsistentPath("no path agrees with the facts of lesion " + std::to_string(i + 1));
    LesionOutcome o;
    o.lesion_id = static_cast<int>(i + 1);
    o.path = *best;
    o.recommendation = best->recommendation;
    o.severity = severity_of(tree, *best);
    outcomes.push_back(std::move(o));
  }
  return aggregate_recommendations(outcomes, tree).path;
}

DecisionPath baseline_path_similarity(const GuidelineTree& tree, const std::string& facts_text,
                                      const std::string& patient_text, EmbeddingProvider& provider,
                                      BackgroundPlacement placement) {
  const auto paths = enumerate_paths(tree);
  if (paths.size() == 1) return paths.front();
  std::string query = facts_text;
  if (placement == BackgroundPlacement::Query) query += "; " + patient_text;
  std::vector<std::string> texts;
  for (const auto& p : paths) {
    std::string t = path_text(tree, p);
    if (placement == BackgroundPlacement::PathText) t += "; " + patient_text;
    texts.push_back(std::move(t));
  }
  std::vector<double> q;
  std::vector<std::vector<double>> vs;
  try {
    q = provider.embed(query);
    vs = provider.embed_batch(texts);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(e.what());
  }
  std::size_t best = 0;
  double best_score = -2.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double s = cosine_similarity(q, vs[i]);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return paths[best];
}

double random_baseline_accuracy(const GuidelineTree& tree) {
  return 1.0 / static_cast<double>(enumerate_paths(tree).size());
}

std::vector<QuantBin> quantized_bins(const GuidelineTree& tree, const std::string& attr) {
  const AttributeDecl& decl = require_decl(tree, attr);
  std::vector<QuantBin> bins;
  if (decl.type == ValueType::Boolean) {
    bins.push_back({attr + ": no", false});
    bins.push_back({attr + ": yes", true});
    return bins;
  }
  if (decl.type == ValueType::Category) {
    for (const auto& c : decl.categories) bins.push_back({c, Category{c}});
    return bins;
  }
  const auto t = sorted_thresholds(tree, decl);
  const std::string unit = decl.unit == Unit::None ? "" : " " + to_string(decl.unit);
  if (t.empty()) {
    bins.push_back({attr + ": any", Quantity{0.0, decl.unit}});
    return bins;
  }
  double gap = 1.0;
  if (t.size() > 1) {
    gap = t[1] - t[0];
    for (std::size_t i = 2; i < t.size(); ++i) gap = std::min(gap, t[i] - t[i - 1]);
  }
  bins.push_back({attr + ": <= " + format_number(t.front()) + unit, Quantity{t.front() - gap / 2.0, decl.unit}});
  for (std::size_t i = 1; i < t.size(); ++i) {
    bins.push_back({attr + ": " + format_number(t[i - 1]) + " to " + format_number(t[i]) + unit,
                    Quantity{(t[i - 1] + t[i]) / 2.0, decl.unit}});
  }
  bins.push_back({attr + ": > " + format_number(t.back()) + unit, Quantity{t.back() + gap / 2.0, decl.unit}});
  return bins;
}

std::size_t bin_of(const GuidelineTree& tree, const std::string& attr, const TypedValue& value) {
  const AttributeDecl& decl = require_decl(tree, attr);
  if (decl.type == ValueType::Boolean) {
    const auto* b = std::get_if<bool>(&value);
    if (!b) throw TypeMismatch("attribute '" + attr + "' expects a boolean");
    return *b ? 1 : 0;
  }
  if (decl.type == ValueType::Category) {
    const auto* c = std::get_if<Category>(&value);
    if (!c) throw TypeMismatch("attribute '" + attr + "' expects a category");
    auto it = std::find(decl.categories.begin(), decl.categories.end(), c->value);
    if (it == decl.categories.end()) throw InvalidArgument("unknown category '" + c->value + "'");
    return static_cast<std::size_t>(it - decl.categories.begin());
  }
  const auto* q = std::get_if<Quantity>(&value);
  if (!q) throw TypeMismatch("attribute '" + attr + "' expects a real");
  const double v = convert_unit(q->value, q->unit, decl.unit);
  const auto t = sorted_thresholds(tree, decl);
  return static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [&](double x) { return v > x; }));
}

std::string ablation_subject(const std::string& organ, const std::string& case_id, const std::string& attr) {
  return "organ=" + organ + "; case=" + case_id + "; attribute=" + attr;
}

BenchCase make_bench_case(std::string case_id, const SyntheticSpec& spec, GeneratedCase generated) {
  BenchCase c;
  c.case_id = std::move(case_id);
  c.spec = spec;
  c.volume = std::make_shared<const Volume>(std::move(generated.volume));
  c.facts = std::move(generated.facts);
  c.lesion_attrs = std::move(generated.lesion_attrs);
  c.lesion_paths = std::move(generated.lesion_paths);
  c.oracle = std::move(generated.oracle);
  c.oracle_lesion = generated.oracle_lesion;
  return c;
}

std::map<std::string, std::string> ablation_answers(const GuidelineTree& tree, const BenchCase& c) {
  std::map<std::string, std::string> answers;
  const AttributeMap* truth = c.oracle_lesion ? &c.lesion_attrs.at(*c.oracle_lesion) : nullptr;
  for (const AttributeDecl* d : ablation_queries(tree)) {
    const auto bins = quantized_bins(tree, d->name);
    const std::string subject = ablation_subject(tree.organ, c.case_id, d->name);
    if (!truth) {
      if (d->type == ValueType::Boolean) answers[subject] = bins[0].label;
      continue;
    }
    const TypedValue* v = truth->find(d->name);
    if (!v) throw SpecError("case " + c.case_id + " has no truth for '" + d->name + "'");
    answers[subject] = bins[bin_of(tree, d->name, *v)].label;
  }
  return answers;
}

AblationLabelerFactory perfect_ablation_labeler() {
  return [](const GuidelineTree& tree, const BenchCase& c) -> std::shared_ptr<Labeler> {
    return std::make_shared<AnswerKeyLabeler>(ablation_answers(tree, c));
  };
}

AblationLabelerFactory noisy_ablation_labeler(double flip_rate, std::uint64_t seed) {
  return [flip_rate, seed](const GuidelineTree& tree, const BenchCase& c) -> std::shared_ptr<Labeler> {
    return std::make_shared<NoisyLabeler>(std::make_shared<AnswerKeyLabeler>(ablation_answers(tree, c)), flip_rate,
                                          seed);
  };
}

AblationLabelerFactory shared_ablation_labeler(std::shared_ptr<Labeler> labeler) {
  return [labeler](const GuidelineTree&, const BenchCase&) { return labeler; };
}

DecisionPath ablated_prediction(const GuidelineTree& tree, const BenchCase& c, Labeler& labeler) {
  AttributeMap attrs;
  for (const AttributeDecl* d : ablation_queries(tree)) {
    const auto bins = quantized_bins(tree, d->name);
    std::vector<std::string> labels;
    for (const auto& b : bins) labels.push_back(b.label);
    const LabelResult r = labeler.classify(ablation_subject(tree.organ, c.case_id, d->name), labels);
    auto it = std::find(labels.begin(), labels.end(), r.label);
    if (it == labels.end()) throw ExecutionError("labeler answered outside the offered bins");
    const TypedValue& value = bins[static_cast<std::size_t>(it - labels.begin())].representative;
    if (d->function == "mass_present" && value == TypedValue{false} && tree.no_lesion_leaf) {
      return no_lesion_path(tree);
    }
    attrs.bind(d->name, value);
  }
  attrs.merge(assess_patient(tree.risk_rules, c.facts.patient));
  return execute_tree(tree, attrs);
}

CaseSource synthetic_source(const GuidelineTree& tree, std::size_t count, std::uint64_t seed) {
  auto shared = std::make_shared<const GuidelineTree>(tree);
  return {count, [shared, seed](std::size_t i) {
            const SyntheticSpec spec = sample_spec(*shared, stable_hash(std::to_string(i), seed));
            return make_bench_case(case_name(i), spec, gen_case(spec, *shared));
          }};
}

std::string to_string(BenchMode mode) {
  switch (mode) {
    case BenchMode::Full:
      return "full";
    case BenchMode::Ablated:
      return "ablated";
    case BenchMode::Baseline:
      return "baseline";
    case BenchMode::Random:
      return "random";
  }
  return "";
}

BenchMode parse_bench_mode(const std::string& text) {
  if (text == "full") return BenchMode::Full;
  if (text == "ablated") return BenchMode::Ablated;
  if (text == "baseline") return BenchMode::Baseline;
  if (text == "random") return BenchMode::Random;
  throw InvalidArgument("unknown mode '" + text + "'");
}

std::shared_ptr<Labeler> band_labeler(const std::string& organ) {
  const PhantomProfile profile = phantom_profile(organ);
  return std::make_shared<EmbeddingLabeler>(std::make_shared<IntensityBandProvider>(profile.bands));
}

EvalResult run_benchmark(const GuidelineTree& tree, const CaseSource& source, const BenchConfig& config) {
  if (source.count == 0) throw EmptyInput("benchmark has no cases");
  const auto paths = enumerate_paths(tree);
  std::optional<Plan> plan = config.plan;
  std::shared_ptr<Labeler> labeler = config.labeler;
  if (config.mode == BenchMode::Full) {
    if (!plan) plan = plan_loop(tree, FunctionRegistry::defaults()).plan;
    if (!labeler) labeler = band_labeler(tree.organ);
  }
  if (config.mode == BenchMode::Ablated && !config.ablation_labeler) {
    throw InvalidArgument("ablated mode needs a labeler");
  }
  if (config.mode == BenchMode::Baseline && !config.embedder) throw InvalidArgument("baseline mode needs a provider");
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);

  std::vector<std::string> preds, truths;
  std::vector<DecisionPath> pred_paths, truth_paths;
  std::vector<CaseError> errors;
  for (std::size_t i = 0; i < source.count; ++i) {
    const BenchCase c = source.load(i);
    const DecisionPath truth = match_report_to_path(tree, c.facts);
    DecisionPath pred;
    try {
      switch (config.mode) {
        case BenchMode::Full: {
          if (!c.volume) throw ExecutionError("case has no volume");
          pred = execute_plan(*plan, tree, *c.volume, c.spec.patient, {labeler}).aggregated.path;
          break;
        }
        case BenchMode::Ablated: {
          auto l = config.ablation_labeler(tree, c);
          pred = ablated_prediction(tree, c, *l);
          break;
        }
        case BenchMode::Baseline:
          pred = baseline_path_similarity(tree, c.facts.findings_text, c.facts.patient_text, *config.embedder,
                                          config.placement);
          break;
        case BenchMode::Random:
          pred = paths[pick(rng)];
          break;
      }
    } catch (const Error& e) {
      errors.push_back({c.case_id, e.kind() + ": " + e.what()});
      pred = DecisionPath{{}, "<error>", ""};
    }
    preds.push_back(pred.leaf_id);
    truths.push_back(truth.leaf_id);
    pred_paths.push_back(std::move(pred));
    truth_paths.push_back(truth);
  }
  EvalResult r = compute_metrics(preds, truths, pred_paths, truth_paths);
  r.mode = to_string(config.mode);
  r.errors = std::move(errors);
  return r;
}

json to_json(const BenchManifest& m) {
  json j;
  j["tree"] = m.tree;
  j["tree_ref"] = {{"organ", m.tree_ref.organ}, {"version", m.tree_ref.version}};
  j["mode"] = m.mode;
  j["seed"] = m.seed;
  j["cases"] = m.cases;
  return j;
}

BenchManifest manifest_from_json(const json& j) {
  try {
    BenchManifest m;
    m.tree = j.at("tree").get<std::string>();
    m.tree_ref.organ = j.at("tree_ref").at("organ").get<std::string>();
    m.tree_ref.version = j.at("tree_ref").at("version").get<std::string>();
    m.mode = j.at("mode").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.cases = j.at("cases").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("manifest: ") + e.what());
  }
}

namespace {

std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                        text.size()));
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(what + ": " + e.what());
  }
}

}  // namespace

BenchManifest read_manifest(const fs::path& path) {
  return manifest_from_json(parse_json(read_text(path), "manifest"));
}

void write_case(const fs::path& dir, const BenchCase& c) {
  if (!c.volume) throw InvalidArgument("case " + c.case_id + " has no volume to write");
  json j;
  j["case_id"] = c.case_id;
  j["spec"] = to_json(c.spec);
  j["facts"] = to_json(c.facts);
  json lesions = json::array();
  for (std::size_t i = 0; i < c.lesion_attrs.size(); ++i) {
    lesions.push_back({{"attributes", to_json(c.lesion_attrs[i])}, {"path", to_json(c.lesion_paths.at(i))}});
  }
  j["lesions"] = std::move(lesions);
  json oracle;
  oracle["path"] = to_json(c.oracle);
  if (c.oracle_lesion) oracle["lesion_index"] = *c.oracle_lesion;
  j["oracle"] = std::move(oracle);
  write_text(dir / (c.case_id + ".json"), j.dump(2) + "\n");
  write_volume(*c.volume, dir / (c.case_id + ".ctv"));
}

BenchCase read_case(const fs::path& json_path, bool with_volume) {
  const json j = parse_json(read_text(json_path), "case " + json_path.string());
  BenchCase c;
  try {
    c.case_id = j.at("case_id").get<std::string>();
    c.spec = synthetic_spec_from_json(j.at("spec"));
    c.facts = report_facts_from_json(j.at("facts"));
    for (const auto& l : j.at("lesions")) {
      c.lesion_attrs.push_back(attribute_map_from_json(l.at("attributes")));
      c.lesion_paths.push_back(decision_path_from_json(l.at("path")));
    }
    c.oracle = decision_path_from_json(j.at("oracle").at("path"));
    if (j.at("oracle").contains("lesion_index")) c.oracle_lesion = j.at("oracle").at("lesion_index").get<std::size_t>();
  } catch (const json::exception& e) {
    throw SchemaError("case " + json_path.string() + ": " + e.what());
  }
  if (with_volume) {
    fs::path vol_path = json_path;
    vol_path.replace_extension(".ctv");
    c.volume = std::make_shared<const Volume>(read_volume(vol_path));
  }
  return c;
}

BenchManifest generate_bench(const GuidelineTree& tree, const std::string& tree_path, std::size_t count,
                             std::uint64_t seed, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const CaseSource source = synthetic_source(tree, count, seed);
  BenchManifest m;
  m.tree = tree_path;
  m.tree_ref = {tree.organ, tree.version};
  m.mode = "full";
  m.seed = seed;
  for (std::size_t i = 0; i < count; ++i) {
    const BenchCase c = source.load(i);
    write_case(out_dir, c);
    m.cases.push_back(c.case_id + ".json");
  }
  write_text(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

CaseSource manifest_source(const fs::path& manifest_path, bool with_volumes) {
  const BenchManifest m = read_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  auto cases = std::make_shared<const std::vector<std::string>>(m.cases);
  return {cases->size(), [cases, dir, with_volumes](std::size_t i) {
            return read_case(dir / cases->at(i), with_volumes);
          }};
}

}  // namespace ifct
