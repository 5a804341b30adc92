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

#include "ifct/labeler.hpp"

#include <random>
#include <set>

#include "ifct/error.hpp"
#include "ifct/geometry.hpp"

namespace ifct {
namespace {

void check_labels(const std::vector<std::string>& labels) {
  if (labels.empty()) throw EmptyLabelSet("label set is empty");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw InvalidArgument("duplicate label '" + l + "'");
  }
}

LabelResult one_hot(const std::vector<std::string>& labels, std::size_t chosen) {
  LabelResult out{labels[chosen], std::vector<double>(labels.size(), 0.0)};
  out.scores[chosen] = 1.0;
  return out;
}

}  // namespace

LabelResult classify_label(EmbeddingProvider& provider, const std::string& subject,
                           const std::vector<std::string>& labels) {
  check_labels(labels);
  std::vector<std::string> texts;
  texts.reserve(labels.size() + 1);
  texts.push_back(subject);
  texts.insert(texts.end(), labels.begin(), labels.end());

  std::vector<std::vector<double>> vectors;
  try {
    vectors = provider.embed_batch(texts);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(std::string("embedding provider failed: ") + e.what());
  }
  if (vectors.size() != texts.size()) throw ProviderError("embedding provider returned wrong vector count");

  LabelResult out;
  std::size_t best = 0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    out.scores.push_back(cosine_similarity(vectors[0], vectors[n + 1]));
    if (out.scores[n] > out.scores[best]) best = n;
  }
  out.label = labels[best];
  return out;
}

EmbeddingLabeler::EmbeddingLabeler(std::shared_ptr<EmbeddingProvider> provider)
    : provider_(make_concurrency_safe(std::move(provider))) {
  if (!provider_) throw InvalidArgument("EmbeddingLabeler requires a provider");
}

LabelResult EmbeddingLabeler::classify(const std::string& subject, const std::vector<std::string>& labels) {
  return classify_label(*provider_, subject, labels);
}

LabelResult AnswerKeyLabeler::classify(const std::string& subject, const std::vector<std::string>& labels) {
  check_labels(labels);
  auto it = answers_.find(subject);
  if (it == answers_.end()) throw ProviderError("no answer recorded for '" + subject + "'");
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] == it->second) return one_hot(labels, n);
  }
  throw ProviderError("answer '" + it->second + "' is not among the offered labels");
}

NoisyLabeler::NoisyLabeler(std::shared_ptr<Labeler> inner, double flip_rate, std::uint64_t seed)
    : inner_(std::move(inner)), flip_rate_(flip_rate), seed_(seed) {
  if (!inner_) throw InvalidArgument("NoisyLabeler requires an inner labeler");
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) throw InvalidArgument("flip rate must lie in [0, 1]");
}

LabelResult NoisyLabeler::classify(const std::string& subject, const std::vector<std::string>& labels) {
  LabelResult clean = inner_->classify(subject, labels);
  if (labels.size() < 2) return clean;
  std::mt19937_64 rng(stable_hash(subject, seed_));
  const double u = double(rng() >> 11) * 0x1.0p-53;
  if (u >= flip_rate_) return clean;
  std::size_t truth = 0;
  while (labels[truth] != clean.label) ++truth;
  std::size_t other = static_cast<std::size_t>(rng() % (labels.size() - 1));
  if (other >= truth) ++other;
  return one_hot(labels, other);
}

}  // namespace ifct
