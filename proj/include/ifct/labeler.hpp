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

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ifct/embedding.hpp"

namespace ifct {

struct LabelResult {
  std::string label;
  std::vector<double> scores;  // one per input label, input order
};

/// Embeds the subject and every label and returns the label with the highest
/// cosine similarity; ties go to the earliest label.
LabelResult classify_label(EmbeddingProvider& provider, const std::string& subject,
                           const std::vector<std::string>& labels);

/// Anything that assigns one of a fixed set of labels to a subject text.
class Labeler {
 public:
  virtual ~Labeler() = default;
  virtual LabelResult classify(const std::string& subject, const std::vector<std::string>& labels) = 0;
};

/// classify_label over an embedding provider.
class EmbeddingLabeler final : public Labeler {
 public:
  explicit EmbeddingLabeler(std::shared_ptr<EmbeddingProvider> provider);
  LabelResult classify(const std::string& subject, const std::vector<std::string>& labels) override;
  EmbeddingProvider& provider() { return *provider_; }

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
};

/// Returns a fixed answer per subject text. Scores are one-hot.
class AnswerKeyLabeler final : public Labeler {
 public:
  explicit AnswerKeyLabeler(std::map<std::string, std::string> answers) : answers_(std::move(answers)) {}
  LabelResult classify(const std::string& subject, const std::vector<std::string>& labels) override;

 private:
  std::map<std::string, std::string> answers_;
};

/// Replaces the inner labeler's answer with a different label with
/// probability `flip_rate`. The decision is a pure function of
/// (seed, subject), so repeated runs flip the same queries.
class NoisyLabeler final : public Labeler {
 public:
  NoisyLabeler(std::shared_ptr<Labeler> inner, double flip_rate, std::uint64_t seed);
  LabelResult classify(const std::string& subject, const std::vector<std::string>& labels) override;

 private:
  std::shared_ptr<Labeler> inner_;
  double flip_rate_;
  std::uint64_t seed_;
};

}  // namespace ifct
