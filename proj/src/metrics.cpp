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

#include <cstdio>
#include <map>

#include "ifct/bench.hpp"

namespace ifct {

using json = nlohmann::ordered_json;

EvalResult compute_metrics(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                           const std::vector<DecisionPath>& pred_paths, const std::vector<DecisionPath>& truth_paths) {
  if (preds.size() != truths.size() || pred_paths.size() != preds.size() || truth_paths.size() != preds.size()) {
    throw LengthMismatch("predictions, truths and paths must have equal lengths");
  }
  if (preds.empty()) throw EmptyInput("no cases to score");
  const std::size_t n = preds.size();

  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> counts;
  std::size_t correct = 0;
  std::size_t explained = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i] == truths[i]) {
      ++correct;
      ++counts[truths[i]].tp;
    } else {
      ++counts[preds[i]].fp;
      ++counts[truths[i]].fn;
    }
    if (pred_paths[i].steps == truth_paths[i].steps && pred_paths[i].leaf_id == truth_paths[i].leaf_id) ++explained;
  }

  EvalResult r;
  r.n_cases = n;
  r.accuracy = static_cast<double>(correct) / n;
  r.explanation_accuracy = static_cast<double>(explained) / n;
  for (const auto& [cls, c] : counts) {
    ClassMetrics m;
    m.cls = cls;
    m.support = c.tp + c.fn;
    m.precision = c.tp + c.fp ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    m.recall = m.support ? static_cast<double>(c.tp) / m.support : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    r.weighted_f1 += static_cast<double>(m.support) / n * m.f1;
    r.per_class.push_back(m);
  }
  return r;
}

json to_json(const EvalResult& result) {
  json j;
  j["mode"] = result.mode;
  j["n_cases"] = result.n_cases;
  j["accuracy"] = result.accuracy;
  j["weighted_f1"] = result.weighted_f1;
  j["explanation_accuracy"] = result.explanation_accuracy;
  json classes = json::array();
  for (const auto& m : result.per_class) {
    json c;
    c["class"] = m.cls;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["support"] = m.support;
    classes.push_back(std::move(c));
  }
  j["per_class"] = std::move(classes);
  json errors = json::array();
  for (const auto& e : result.errors) errors.push_back({{"case", e.case_id}, {"error", e.error}});
  j["errors"] = std::move(errors);
  return j;
}

std::string csv_line(const EvalResult& result) {
  char buf[160];
  std::snprintf(buf, sizeof buf, ",%zu,%.4f,%.4f,%.4f", result.n_cases, result.accuracy, result.weighted_f1,
                result.explanation_accuracy);
  return result.mode + buf;
}

}  // namespace ifct
