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

#include "ifct/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "ifct/planner.hpp"

namespace ifct {

using json = nlohmann::ordered_json;

PhantomProfile phantom_profile(const std::string& organ) {
  PhantomProfile p;
  p.organ = organ;
  if (organ == "liver") {
    p.organ_hu = 60;
    p.lesion_hu_lo = -40;
    p.lesion_hu_hi = 40;
    p.diameter_hi_mm = 32.0;
    p.feature_attr = "imaging_features";
    p.bands = {{"benign", -50.0, 15.0}, {"suspicious", 15.0, 46.0}};
  } else if (organ == "renal") {
    p.organ_hu = 150;
    p.lesion_hu_lo = -20;
    p.lesion_hu_hi = 100;
    p.diameter_hi_mm = 36.0;
    p.feature_attr = "renal_features";
    p.bands = {{"homogeneous", -30.0, 45.0}, {"heterogeneous", 45.0, 111.0}};
  } else if (organ == "pancreas") {
    p.organ_hu = 100;
    p.lesion_hu_lo = -30;
    p.lesion_hu_hi = 75;
    p.diameter_hi_mm = 36.0;
    p.feature_attr = "pancreas_features";
    p.bands = {{"cystic", -40.0, 25.0}, {"solid", 25.0, 81.0}};
  } else {
    throw SpecError("no phantom profile for organ '" + organ + "'");
  }
  return p;
}

namespace {

json to_json(const LesionSpec& l) {
  json j;
  j["center_mm"] = {l.center_mm[0], l.center_mm[1], l.center_mm[2]};
  j["diameter_mm"] = l.diameter_mm;
  j["hu"] = l.hu;
  return j;
}

std::array<double, 3> organ_center(const Dims& d, const Spacing& s) {
  return {(d.nx - 1) * 0.5 * s.sx, (d.ny - 1) * 0.5 * s.sy, (d.nz - 1) * 0.5 * s.sz};
}

double distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

void collect_thresholds(const Predicate& p, const std::string& attr, std::vector<Quantity>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Compare>) {
          if (n.attr == attr) {
            if (const auto* q = std::get_if<Quantity>(&n.value)) out.push_back(*q);
          }
        } else if constexpr (std::is_same_v<T, InRange>) {
          if (n.attr == attr) {
            out.push_back({n.lo, n.unit});
            out.push_back({n.hi, n.unit});
          }
        } else if constexpr (std::is_same_v<T, AllOf> || std::is_same_v<T, AnyOf>) {
          for (const auto& t : n.terms) collect_thresholds(t, attr, out);
        } else if constexpr (std::is_same_v<T, Negation>) {
          collect_thresholds(*n.term, attr, out);
        }
      },
      p.node);
}

const char* feature_of(const PhantomProfile& profile, int hu) {
  for (const auto& b : profile.bands) {
    if (hu >= b.lo && hu < b.hi) return b.label.c_str();
  }
  return nullptr;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string findings_text(const std::string& organ, const std::vector<LesionSpec>& lesions,
                          const PhantomProfile& profile) {
  if (lesions.empty()) return organ + ": no focal lesion.";
  std::string out = organ + ": " + std::to_string(lesions.size()) + (lesions.size() == 1 ? " lesion." : " lesions.");
  for (std::size_t i = 0; i < lesions.size(); ++i) {
    const char* feature = feature_of(profile, lesions[i].hu);
    out += " Lesion " + std::to_string(i + 1) + ": " + fixed(lesions[i].diameter_mm / 10.0, 2) + " cm, " +
           std::to_string(lesions[i].hu) + " HU" + (feature ? std::string(", ") + feature : std::string()) + ".";
  }
  return out;
}

std::string patient_text(const PatientRecord& p) {
  std::string out = std::to_string(p.age_years) + "-year-old " + (p.sex == "F" ? "female" : "male");
  std::vector<std::string> history;
  for (const auto& [flag, on] : p.flags) {
    if (!on) continue;
    std::string words = flag;
    std::replace(words.begin(), words.end(), '_', ' ');
    history.push_back(words);
  }
  if (history.empty()) {
    out += "; no relevant history";
  } else {
    for (const auto& h : history) out += "; " + h;
  }
  return out + "; " + p.phase + " phase.";
}

}  // namespace

json to_json(const SyntheticSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["organ"] = spec.organ;
  j["dims"] = {spec.dims.nx, spec.dims.ny, spec.dims.nz};
  j["spacing_mm"] = {spec.spacing.sx, spec.spacing.sy, spec.spacing.sz};
  j["background_hu"] = spec.background_hu;
  j["organ_hu"] = spec.organ_hu;
  j["organ_radius_mm"] = spec.organ_radius_mm;
  json lesions = json::array();
  for (const auto& l : spec.lesions) lesions.push_back(to_json(l));
  j["lesions"] = std::move(lesions);
  j["patient"] = to_json(spec.patient);
  return j;
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  try {
    SyntheticSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.organ = j.at("organ").get<std::string>();
    const auto& d = j.at("dims");
    s.dims = {d.at(0).get<std::uint32_t>(), d.at(1).get<std::uint32_t>(), d.at(2).get<std::uint32_t>()};
    const auto& sp = j.at("spacing_mm");
    s.spacing = {sp.at(0).get<float>(), sp.at(1).get<float>(), sp.at(2).get<float>()};
    s.background_hu = j.at("background_hu").get<int>();
    s.organ_hu = j.at("organ_hu").get<int>();
    s.organ_radius_mm = j.at("organ_radius_mm").get<double>();
    for (const auto& l : j.at("lesions")) {
      LesionSpec ls;
      const auto& c = l.at("center_mm");
      ls.center_mm = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
      ls.diameter_mm = l.at("diameter_mm").get<double>();
      ls.hu = l.at("hu").get<int>();
      s.lesions.push_back(ls);
    }
    s.patient = patient_from_json(j.at("patient"));
    return s;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("synthetic spec: ") + e.what());
  }
}

json to_json(const ReportFacts& facts) {
  json j;
  json lesions = json::array();
  for (const auto& l : facts.lesions) lesions.push_back(to_json(l));
  j["lesions"] = std::move(lesions);
  j["patient"] = to_json(facts.patient);
  j["findings_text"] = facts.findings_text;
  j["patient_text"] = facts.patient_text;
  if (facts.oracle_path_hint) j["oracle_path_hint"] = to_json(*facts.oracle_path_hint);
  return j;
}

ReportFacts report_facts_from_json(const json& j) {
  try {
    ReportFacts f;
    for (const auto& l : j.at("lesions")) f.lesions.push_back(attribute_map_from_json(l));
    f.patient = patient_from_json(j.at("patient"));
    f.findings_text = j.at("findings_text").get<std::string>();
    f.patient_text = j.at("patient_text").get<std::string>();
    if (j.contains("oracle_path_hint")) f.oracle_path_hint = decision_path_from_json(j.at("oracle_path_hint"));
    return f;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("report facts: ") + e.what());
  }
}

std::vector<Quantity> attribute_thresholds(const GuidelineTree& tree, const std::string& attr) {
  std::vector<Quantity> out;
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf()) collect_thresholds(node.decision().predicate, attr, out);
  }
  return out;
}

AttributeMap nominal_attributes(const GuidelineTree& tree, const PhantomProfile& profile, const LesionSpec& lesion) {
  AttributeMap attrs;
  for (const auto& decl : tree.attributes) {
    if (decl.producer == Producer::Patient) continue;
    if (decl.producer == Producer::Classify) {
      if (decl.name != profile.feature_attr) {
        throw SpecError("phantom cannot realise category attribute '" + decl.name + "'");
      }
      const char* feature = feature_of(profile, lesion.hu);
      if (!feature) throw SpecError("lesion HU " + std::to_string(lesion.hu) + " lies in no feature band");
      attrs.bind(decl.name, Category{feature});
      continue;
    }
    if (decl.function == "mass_present") {
      attrs.bind(decl.name, true);
    } else if (decl.function == "calc_mass_diameter_cm") {
      attrs.bind(decl.name, Quantity{lesion.diameter_mm / 10.0, Unit::Cm});
    } else if (decl.function == "calc_mass_diameter_mm") {
      attrs.bind(decl.name, Quantity{lesion.diameter_mm, Unit::Mm});
    } else if (decl.function == "mean_intensity_hu") {
      attrs.bind(decl.name, Quantity{static_cast<double>(lesion.hu), Unit::Hu});
    } else {
      throw SpecError("phantom cannot realise measure '" + decl.function + "'");
    }
  }
  return attrs;
}

bool clear_of_thresholds(const GuidelineTree& tree, const PhantomProfile& profile, const Spacing& spacing,
                         const LesionSpec& lesion) {
  const double margin_mm = 2.0 * spacing.max();
  for (const auto& decl : tree.attributes) {
    if (decl.producer != Producer::Measure || decl.type != ValueType::Real) continue;
    for (const auto& t : attribute_thresholds(tree, decl.name)) {
      if (t.unit == Unit::Mm || t.unit == Unit::Cm) {
        if (std::abs(lesion.diameter_mm - convert_unit(t.value, t.unit, Unit::Mm)) <= margin_mm) return false;
      } else if (t.unit == Unit::Hu) {
        if (std::abs(lesion.hu - t.value) <= 1.0) return false;
      }
    }
  }
  for (const auto& b : profile.bands) {
    if (std::abs(lesion.hu - b.lo) <= 1.0 || std::abs(lesion.hu - b.hi) <= 1.0) return false;
  }
  return true;
}

GeneratedCase gen_case(const SyntheticSpec& spec, const GuidelineTree& tree) {
  if (spec.organ != tree.organ) throw SpecError("spec organ " + spec.organ + " does not match tree " + tree.organ);
  const PhantomProfile profile = phantom_profile(spec.organ);
  const Grid grid(spec.dims, spec.spacing);
  const auto center = organ_center(spec.dims, spec.spacing);
  const SegmentationParams window = default_protocol(spec.organ).mass;
  const double gap = 2.0 * spec.spacing.max();

  if (spec.background_hu >= window.hu_low && spec.background_hu <= window.hu_high) {
    throw SpecError("background HU lies inside the mass window");
  }
  if (spec.organ_hu >= window.hu_low && spec.organ_hu <= window.hu_high) {
    throw SpecError("organ HU lies inside the mass window");
  }
  for (std::size_t i = 0; i < spec.lesions.size(); ++i) {
    const LesionSpec& a = spec.lesions[i];
    const std::string name = "lesion " + std::to_string(i + 1);
    if (!(a.diameter_mm > 0.0)) throw SpecError(name + ": diameter must be positive");
    if (a.hu < window.hu_low || a.hu > window.hu_high) throw SpecError(name + ": HU outside the mass window");
    if (distance(a.center_mm, center) > spec.organ_radius_mm - a.diameter_mm / 2.0 - gap) {
      throw SpecError(name + ": does not fit inside the organ");
    }
    if (!clear_of_thresholds(tree, profile, spec.spacing, a)) {
      throw SpecError(name + ": value within digitisation error of a threshold");
    }
    for (std::size_t k = 0; k < i; ++k) {
      const LesionSpec& b = spec.lesions[k];
      if (distance(a.center_mm, b.center_mm) <= (a.diameter_mm + b.diameter_mm) / 2.0 + gap) {
        throw SpecError(name + ": overlaps lesion " + std::to_string(k + 1));
      }
    }
  }

  Volume vol(grid, static_cast<std::int16_t>(spec.background_hu));
  auto& voxels = vol.mutable_voxels();
  const Dims& d = spec.dims;
  for (std::uint32_t k = 0; k < d.nz; ++k) {
    for (std::uint32_t j = 0; j < d.ny; ++j) {
      for (std::uint32_t i = 0; i < d.nx; ++i) {
        const VoxelIndex v{i, j, k};
        const auto p = voxel_center_mm(spec.spacing, v);
        std::int16_t hu = static_cast<std::int16_t>(spec.background_hu);
        if (distance(p, center) <= spec.organ_radius_mm) hu = static_cast<std::int16_t>(spec.organ_hu);
        for (const auto& l : spec.lesions) {
          if (distance(p, l.center_mm) <= l.diameter_mm / 2.0) hu = static_cast<std::int16_t>(l.hu);
        }
        voxels[linear_index(d, v)] = hu;
      }
    }
  }

  GeneratedCase out{std::move(vol), spec.patient, {}, {}, {}, {}, std::nullopt};
  const AttributeMap patient_attrs = assess_patient(tree.risk_rules, spec.patient);
  std::vector<LesionOutcome> outcomes;
  for (std::size_t i = 0; i < spec.lesions.size(); ++i) {
    AttributeMap attrs = nominal_attributes(tree, profile, spec.lesions[i]);
    AttributeMap all = attrs;
    all.merge(patient_attrs);
    DecisionPath path = execute_tree(tree, all);
    LesionOutcome o;
    o.lesion_id = static_cast<int>(i + 1);
    o.path = path;
    o.recommendation = path.recommendation;
    o.severity = tree.find(path.leaf_id)->leaf().severity;
    outcomes.push_back(o);
    out.lesion_attrs.push_back(std::move(attrs));
    out.lesion_paths.push_back(std::move(path));
  }
  const AggregatedResult agg = aggregate_recommendations(outcomes, tree);
  out.oracle = agg.path;
  if (agg.source_lesion_id) out.oracle_lesion = static_cast<std::size_t>(*agg.source_lesion_id - 1);

  out.facts.lesions = out.lesion_attrs;
  out.facts.patient = spec.patient;
  out.facts.findings_text = findings_text(spec.organ, spec.lesions, profile);
  out.facts.patient_text = patient_text(spec.patient);
  return out;
}

namespace {

PatientRecord sample_patient(std::mt19937_64& rng, const std::string& id) {
  std::uniform_int_distribution<int> age(20, 90);
  std::bernoulli_distribution malignancy(0.30);
  std::bernoulli_distribution cirrhosis(0.15);
  std::bernoulli_distribution female(0.5);
  PatientRecord p;
  p.patient_id = id;
  p.age_years = age(rng);
  p.sex = female(rng) ? "F" : "M";
  p.flags["known_malignancy"] = malignancy(rng);
  p.flags["cirrhosis"] = cirrhosis(rng);
  p.phase = "venous";
  return p;
}

LesionSpec sample_lesion(std::mt19937_64& rng, const PhantomProfile& profile) {
  std::uniform_real_distribution<double> diameter(profile.diameter_lo_mm, profile.diameter_hi_mm);
  std::uniform_int_distribution<int> hu(profile.lesion_hu_lo, profile.lesion_hu_hi);
  LesionSpec l;
  // Hundredths of a millimetre keep the stated facts exact in text.
  l.diameter_mm = std::round(diameter(rng) * 100.0) / 100.0;
  l.hu = hu(rng);
  return l;
}

// Centres sit on voxel centres so the digitised sphere is symmetric.
bool place(std::mt19937_64& rng, const PhantomProfile& profile, LesionSpec& lesion,
           const std::vector<LesionSpec>& others) {
  const auto center = organ_center(profile.dims, profile.spacing);
  const double gap = 2.0 * profile.spacing.max();
  const double reach = profile.organ_radius_mm - lesion.diameter_mm / 2.0 - gap;
  if (reach < 0.0) return false;
  const Spacing& s = profile.spacing;
  std::uniform_int_distribution<int> ix(static_cast<int>(std::ceil((center[0] - reach) / s.sx)),
                                        static_cast<int>(std::floor((center[0] + reach) / s.sx)));
  std::uniform_int_distribution<int> iy(static_cast<int>(std::ceil((center[1] - reach) / s.sy)),
                                        static_cast<int>(std::floor((center[1] + reach) / s.sy)));
  std::uniform_int_distribution<int> iz(static_cast<int>(std::ceil((center[2] - reach) / s.sz)),
                                        static_cast<int>(std::floor((center[2] + reach) / s.sz)));
  for (int attempt = 0; attempt < 2000; ++attempt) {
    const std::array<double, 3> c{ix(rng) * static_cast<double>(s.sx), iy(rng) * static_cast<double>(s.sy),
                                  iz(rng) * static_cast<double>(s.sz)};
    if (distance(c, center) > reach) continue;
    const bool clear = std::all_of(others.begin(), others.end(), [&](const LesionSpec& o) {
      return distance(c, o.center_mm) > (lesion.diameter_mm + o.diameter_mm) / 2.0 + gap;
    });
    if (!clear) continue;
    lesion.center_mm = c;
    return true;
  }
  return false;
}

}  // namespace

SyntheticSpec sample_spec(const GuidelineTree& tree, std::uint64_t seed) {
  const PhantomProfile profile = phantom_profile(tree.organ);
  std::mt19937_64 rng(seed);
  SyntheticSpec spec;
  spec.seed = seed;
  spec.organ = tree.organ;
  spec.dims = profile.dims;
  spec.spacing = profile.spacing;
  spec.background_hu = profile.background_hu;
  spec.organ_hu = profile.organ_hu;
  spec.organ_radius_mm = profile.organ_radius_mm;
  const std::string patient_id = "P" + std::to_string(seed);

  const auto paths = enumerate_paths(tree);
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  const std::string target = paths[pick(rng)].leaf_id;
  if (tree.no_lesion_leaf && target == *tree.no_lesion_leaf) {
    spec.patient = sample_patient(rng, patient_id);
    return spec;
  }

  auto leaf_of = [&](const LesionSpec& l, const AttributeMap& patient_attrs) {
    AttributeMap all = nominal_attributes(tree, profile, l);
    all.merge(patient_attrs);
    return execute_tree(tree, all).leaf_id;
  };

  constexpr int kMaxAttempts = 200000;
  bool found = false;
  LesionSpec dominant;
  AttributeMap patient_attrs;
  for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
    spec.patient = sample_patient(rng, patient_id);
    dominant = sample_lesion(rng, profile);
    if (!clear_of_thresholds(tree, profile, profile.spacing, dominant)) continue;
    patient_attrs = assess_patient(tree.risk_rules, spec.patient);
    found = leaf_of(dominant, patient_attrs) == target;
  }
  if (!found) throw SpecError("could not reach leaf '" + target + "' by sampling");
  if (!place(rng, profile, dominant, {})) throw SpecError("could not place a lesion inside the organ");
  spec.lesions.push_back(dominant);

  const int dominant_severity = tree.find(target)->leaf().severity;
  std::bernoulli_distribution extra(profile.extra_lesion_rate);
  if (extra(rng)) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      LesionSpec l = sample_lesion(rng, profile);
      if (!clear_of_thresholds(tree, profile, profile.spacing, l)) continue;
      if (tree.find(leaf_of(l, patient_attrs))->leaf().severity >= dominant_severity) continue;
      if (place(rng, profile, l, spec.lesions)) spec.lesions.push_back(l);
      break;
    }
  }
  return spec;
}

}  // namespace ifct
