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

#include "ifct/remote.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

namespace ifct {

using json = nlohmann::ordered_json;

HttpEndpoint parse_endpoint(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw InvalidArgument("only http:// endpoints are supported: '" + url + "'");
  const std::size_t slash = url.find('/', scheme.size());
  HttpEndpoint e;
  e.base = url.substr(0, slash);
  e.path = slash == std::string::npos ? "/" : url.substr(slash);
  if (e.base.size() == scheme.size()) throw InvalidArgument("endpoint has no host: '" + url + "'");
  return e;
}

namespace {

std::string post(const HttpEndpoint& e, double timeout_s, const std::string& body, const std::string& content_type) {
  httplib::Client client(e.base);
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  auto res = client.Post(e.path, body, content_type);
  if (!res) throw ProviderError("request to " + e.base + e.path + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ProviderError("request to " + e.base + e.path + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

json parse_response(const std::string& body, const std::string& what) {
  try {
    return json::parse(body);
  } catch (const json::exception& ex) {
    throw ProviderError(what + " response is not valid JSON: " + ex.what());
  }
}

}  // namespace

RemoteEmbeddingProvider::RemoteEmbeddingProvider(const std::string& url, double timeout_s)
    : endpoint_(parse_endpoint(url)), timeout_s_(timeout_s) {}

std::vector<double> RemoteEmbeddingProvider::embed(const std::string& text) { return embed_batch({text}).front(); }

std::vector<std::vector<double>> RemoteEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
  json req;
  req["texts"] = texts;
  const json res = parse_response(post(endpoint_, timeout_s_, req.dump(), "application/json"), "embedding");
  std::vector<std::vector<double>> vectors;
  std::size_t dim = 0;
  try {
    vectors = res.at("vectors").get<std::vector<std::vector<double>>>();
    dim = res.at("dim").get<std::size_t>();
  } catch (const json::exception& ex) {
    throw ProviderError(std::string("malformed embedding response: ") + ex.what());
  }
  if (vectors.size() != texts.size()) throw ProviderError("embedding response has the wrong number of vectors");
  for (const auto& v : vectors) {
    if (v.size() != dim) throw ProviderError("embedding response vector length differs from dim");
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (std::abs(std::sqrt(norm) - 1.0) > 1e-6) throw ProviderError("embedding response vector is not unit-norm");
  }
  if (dim_ != 0 && dim != dim_) throw ProviderError("embedding dimension changed between responses");
  dim_ = dim;
  return vectors;
}

HttpPlannerClient::HttpPlannerClient(const std::string& url, double timeout_s)
    : endpoint_(parse_endpoint(url)), timeout_s_(timeout_s) {}

Plan HttpPlannerClient::request_plan(const GuidelineTree& tree, const FunctionRegistry& registry) {
  json req;
  req["tree"] = to_json(tree);
  req["registry"] = to_json(registry);
  const std::string body = post(endpoint_, timeout_s_, req.dump(), "application/json");
  try {
    return parse_plan(body);
  } catch (const SchemaError& ex) {
    throw ProviderError(std::string("planner returned an invalid plan document: ") + ex.what());
  }
}

HttpParserClient::HttpParserClient(const std::string& url, double timeout_s)
    : endpoint_(parse_endpoint(url)), timeout_s_(timeout_s) {}

GuidelineTree HttpParserClient::parse(const std::string& raw_document) {
  return parse_guideline(post(endpoint_, timeout_s_, raw_document, "text/plain"));
}

}  // namespace ifct
