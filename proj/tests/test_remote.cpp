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

#include <httplib.h>

#include <thread>

#include "ifct/error.hpp"
#include "ifct/labeler.hpp"
#include "ifct/remote.hpp"
#include "support.hpp"

namespace ifct {
namespace {

using nlohmann::ordered_json;

// Local HTTP stub on an ephemeral port, torn down with the fixture.
class StubServer : public ::testing::Test {
 protected:
  void SetUp() override {
    HashEmbeddingProvider hash(5);
    server.Post("/embed", [hash](const httplib::Request& req, httplib::Response& res) mutable {
      const auto body = ordered_json::parse(req.body);
      ordered_json vectors = ordered_json::array();
      for (const auto& t : body.at("texts")) vectors.push_back(hash.embed(t.get<std::string>()));
      res.set_content(ordered_json{{"vectors", vectors}, {"dim", 64}}.dump(), "application/json");
    });
    server.Post("/unnormalised", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = ordered_json::parse(req.body);
      ordered_json vectors = ordered_json::array();
      for (std::size_t i = 0; i < body.at("texts").size(); ++i) vectors.push_back({3.0, 4.0});
      res.set_content(ordered_json{{"vectors", vectors}, {"dim", 2}}.dump(), "application/json");
    });
    server.Post("/short", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"vectors": [], "dim": 2})", "application/json");
    });
    server.Post("/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    server.Post("/plan", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = ordered_json::parse(req.body);
      const auto tree = load_guideline(body.at("tree"));
      const auto registry = registry_from_json(body.at("registry"));
      res.set_content(serialize_plan(synthesize_plan(tree, registry)), "application/json");
    });
    server.Post("/empty-plan", [](const httplib::Request& req, httplib::Response& res) {
      const auto tree = load_guideline(ordered_json::parse(req.body).at("tree"));
      Plan p;
      p.plan_id = "empty";
      p.tree_ref = {tree.organ, tree.version};
      res.set_content(serialize_plan(p), "application/json");
    });
    server.Post("/parse", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(serialize_guideline(testing::shipped_tree("renal")), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  void TearDown() override {
    server.stop();
    if (thread.joinable()) thread.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }

  httplib::Server server;
  std::thread thread;
  int port = 0;
};

TEST(Endpoint, Parsing) {
  const auto e = parse_endpoint("http://localhost:8080/v1/embed");
  EXPECT_EQ(e.base, "http://localhost:8080");
  EXPECT_EQ(e.path, "/v1/embed");
  EXPECT_EQ(parse_endpoint("http://host").path, "/");
  EXPECT_THROW(parse_endpoint("https://host/x"), InvalidArgument);
}

TEST_F(StubServer, EmbeddingsMatchTheBackend) {
  RemoteEmbeddingProvider remote(url("/embed"));
  HashEmbeddingProvider hash(5);
  EXPECT_EQ(remote.embed("benign"), hash.embed("benign"));
  EXPECT_EQ(remote.dimension(), 64u);
  const auto batch = remote.embed_batch({"a", "b", "c"});
  ASSERT_EQ(batch.size(), 3u);
  EXPECT_EQ(batch[2], hash.embed("c"));
}

TEST_F(StubServer, BadResponsesAreProviderErrors) {
  EXPECT_THROW(RemoteEmbeddingProvider(url("/unnormalised")).embed("x"), ProviderError);
  EXPECT_THROW(RemoteEmbeddingProvider(url("/short")).embed("x"), ProviderError);
  EXPECT_THROW(RemoteEmbeddingProvider(url("/fail")).embed("x"), ProviderError);
}

TEST_F(StubServer, ClassifyThroughRemoteProvider) {
  RemoteEmbeddingProvider remote(url("/embed"));
  HashEmbeddingProvider hash(5);
  const std::vector<std::string> labels{"benign", "suspicious"};
  EXPECT_EQ(classify_label(remote, "organ=liver; diameter_cm=0.80; mean_hu=1.0", labels).label,
            classify_label(hash, "organ=liver; diameter_cm=0.80; mean_hu=1.0", labels).label);
}

TEST_F(StubServer, RemotePlannerIsValidated) {
  const auto tree = testing::shipped_tree("liver");
  const auto registry = FunctionRegistry::defaults();
  HttpPlannerClient echo(url("/plan"));
  EXPECT_EQ(serialize_plan(external_plan(tree, registry, echo)), serialize_plan(synthesize_plan(tree, registry)));
  HttpPlannerClient empty(url("/empty-plan"));
  EXPECT_THROW(external_plan(tree, registry, empty), ValidationFailed);
}

TEST_F(StubServer, RemoteParser) {
  HttpParserClient parser(url("/parse"));
  EXPECT_EQ(enumerate_paths(parser.parse("renal lesions: ...")).size(), 6u);
}

TEST(Unreachable, ConnectionFailureIsProviderError) {
  // Port 1 on loopback is reserved and closed.
  RemoteEmbeddingProvider remote("http://127.0.0.1:1/embed", 2.0);
  EXPECT_THROW(remote.embed("x"), ProviderError);
  HttpPlannerClient planner("http://127.0.0.1:1/plan", 2.0);
  const auto tree = testing::shipped_tree("renal");
  EXPECT_THROW(external_plan(tree, FunctionRegistry::defaults(), planner), ProviderError);
}

}  // namespace
}  // namespace ifct
