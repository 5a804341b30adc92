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

#include <string>
#include <vector>

#include "ifct/embedding.hpp"
#include "ifct/guideline.hpp"
#include "ifct/planner.hpp"

namespace ifct {

/// "http://host[:port][/path]" split into the client base and request path.
struct HttpEndpoint {
  std::string base;  // scheme://host:port
  std::string path;  // starts with '/'
};

/// Throws InvalidArgument for anything but a plain http URL.
HttpEndpoint parse_endpoint(const std::string& url);

/// POSTs {"texts": [...]} and expects {"vectors": [[...]...], "dim": k} with
/// unit-norm vectors. Transport and protocol failures raise ProviderError.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit RemoteEmbeddingProvider(const std::string& url, double timeout_s = 30.0);
  std::vector<double> embed(const std::string& text) override;
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override;
  /// Zero until the first response reports it.
  std::size_t dimension() const override { return dim_; }

 private:
  HttpEndpoint endpoint_;
  double timeout_s_;
  std::size_t dim_ = 0;
};

/// POSTs {"tree": <document>, "registry": <manifest>}; the body of the
/// response is a plan document.
class HttpPlannerClient final : public PlannerClient {
 public:
  explicit HttpPlannerClient(const std::string& url, double timeout_s = 60.0);
  Plan request_plan(const GuidelineTree& tree, const FunctionRegistry& registry) override;

 private:
  HttpEndpoint endpoint_;
  double timeout_s_;
};

/// Sends raw guideline text to a structuring service and validates the
/// returned document with parse_guideline.
class HttpParserClient {
 public:
  explicit HttpParserClient(const std::string& url, double timeout_s = 60.0);
  GuidelineTree parse(const std::string& raw_document);

 private:
  HttpEndpoint endpoint_;
  double timeout_s_;
};

}  // namespace ifct
