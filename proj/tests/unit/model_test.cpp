#include <gtest/gtest.h>

#include <stdlib.h>

#include <atomic>
#include <thread>

#include "hcbr/error.hpp"
#include "hcbr/model.hpp"
#include "hcbr/prompt.hpp"
#include "fake_endpoint.hpp"
#include "test_support.hpp"

using namespace hcbr;
using namespace std::chrono_literals;
using fixture::completion;
using fixture::FakeEndpoint;

namespace {

ModelConfig config_for(const FakeEndpoint& ep) {
  ModelConfig cfg;
  cfg.name = "fake-model";
  cfg.base_url = ep.base_url();
  cfg.retries = 2;
  cfg.backoff = 1ms;
  cfg.timeout = 2s;
  return cfg;
}

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

}  // namespace

TEST(ModelConfigTest, JsonRoundTripAndValidation) {
  ModelConfig cfg;
  cfg.name = "gemini-pro";
  cfg.base_url = "https://example.invalid/v1";
  cfg.api_key_env = "EXAMPLE_KEY";
  cfg.temperature = 0.3;
  cfg.top_p = 0.95;
  cfg.max_tokens = 65536;
  cfg.reasoning_effort = "medium";
  const ModelConfig back = model_config_from_json(model_config_to_json(cfg));
  EXPECT_EQ(model_config_to_json(back), model_config_to_json(cfg));

  auto invalid = [](nlohmann::json j) {
    try {
      model_config_from_json(j);
    } catch (const Error& e) {
      return e.code() == Errc::InvalidConfig;
    }
    return false;
  };
  EXPECT_TRUE(invalid({{"name", "m"}, {"temperature", 2.5}}));
  EXPECT_TRUE(invalid({{"name", "m"}, {"top_p", 0.0}}));
  EXPECT_TRUE(invalid({{"name", "m"}, {"max_parallel", 0}}));
  EXPECT_TRUE(invalid({{"name", "m"}, {"temprature", 0.3}}));
  EXPECT_TRUE(invalid({{"temperature", 0.3}}));
  EXPECT_FALSE(invalid({{"name", "m"}, {"temperature", nullptr}}));
}

TEST(ReasoningTokens, ProviderLayouts) {
  EXPECT_EQ(extract_reasoning_tokens({{"completion_tokens_details", {{"reasoning_tokens", 487}}}}), 487u);
  EXPECT_EQ(extract_reasoning_tokens({{"reasoning_tokens", 12}}), 12u);
  EXPECT_EQ(extract_reasoning_tokens({{"output_tokens_details", {{"reasoning_tokens", 3}}}}), 3u);
  EXPECT_EQ(extract_reasoning_tokens({{"thoughts_token_count", 9}}), 9u);
  EXPECT_FALSE(extract_reasoning_tokens({{"completion_tokens", 40}}));
  EXPECT_FALSE(extract_reasoning_tokens({{"reasoning_tokens", -1}}));
  EXPECT_FALSE(extract_reasoning_tokens(nlohmann::json()));
  EXPECT_EQ(extract_reasoning_tokens({{"x", {{"y", 5}}}, {"reasoning_tokens", 1}}, "/x/y"), 5u);
  EXPECT_FALSE(extract_reasoning_tokens({{"reasoning_tokens", 1}}, "/x/y"));
}

TEST(HttpChatClientTest, RequestAndResponseShape) {
  nlohmann::json seen;
  std::string auth;
  FakeEndpoint ep([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(completion(R"j({"distinctions": ["F6(p)"]})j").dump(), "application/json");
  });
  ModelConfig cfg = config_for(ep);
  cfg.temperature = 0.3;
  cfg.top_p = 0.95;
  cfg.api_key_env = "HCBR_TEST_KEY";
  setenv("HCBR_TEST_KEY", "secret-value", 1);
  HttpChatClient client(cfg);
  const ModelResponse r = client.complete("hello");
  unsetenv("HCBR_TEST_KEY");

  EXPECT_EQ(seen["model"], "fake-model");
  EXPECT_EQ(seen["messages"], nlohmann::json::parse(R"j([{"role":"user","content":"hello"}])j"));
  EXPECT_EQ(seen["temperature"], 0.3);
  EXPECT_EQ(seen["top_p"], 0.95);
  EXPECT_FALSE(seen.contains("max_tokens"));
  EXPECT_EQ(auth, "Bearer secret-value");
  EXPECT_EQ(r.text, R"j({"distinctions": ["F6(p)"]})j");
  EXPECT_EQ(r.reasoning_tokens, 120u);
  EXPECT_EQ(r.completion_tokens, 150u);
  EXPECT_EQ(r.finish_reason, "stop");
  EXPECT_FALSE(r.truncated);
}

TEST(HttpChatClientTest, MissingCredentialIsAuthMissing) {
  ModelConfig cfg;
  cfg.name = "m";
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.api_key_env = "HCBR_TEST_UNSET_KEY";
  unsetenv("HCBR_TEST_UNSET_KEY");
  EXPECT_EQ(error_of([&] { HttpChatClient c(cfg); }), Errc::AuthMissing);
  cfg.api_key_env.clear();
  cfg.base_url = "ftp://example";
  EXPECT_EQ(error_of([&] { HttpChatClient c(cfg); }), Errc::InvalidConfig);
}

TEST(HttpChatClientTest, LengthFinishIsFlaggedNotThrown) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("{\"distinc", "length", 65000).dump(), "application/json");
  });
  HttpChatClient client(config_for(ep));
  const ModelResponse r = client.complete("p");
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.text, "{\"distinc");
  EXPECT_EQ(r.reasoning_tokens, 65000u);
}

TEST(HttpChatClientTest, RetriesTransientFailures) {
  std::atomic<int> n{0};
  FakeEndpoint ep([&](const httplib::Request&, httplib::Response& res) {
    if (++n <= 2) {
      res.status = 503;
      return;
    }
    res.set_content(completion("ok").dump(), "application/json");
  });
  HttpChatClient client(config_for(ep));
  EXPECT_EQ(client.complete("p").text, "ok");
  EXPECT_EQ(ep.calls(), 3);
}

TEST(HttpChatClientTest, RateLimitAfterRetryBudget) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  HttpChatClient client(config_for(ep));
  EXPECT_EQ(error_of([&] { client.complete("p"); }), Errc::RateLimited);
  EXPECT_EQ(ep.calls(), 3);
}

TEST(HttpChatClientTest, ClientErrorsAreNotRetried) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  HttpChatClient client(config_for(ep));
  EXPECT_EQ(error_of([&] { client.complete("p"); }), Errc::Transport);
  EXPECT_EQ(ep.calls(), 1);
}

TEST(HttpChatClientTest, TimeoutBecomesTransportAfterRetries) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(400ms);
    res.set_content(completion("late").dump(), "application/json");
  });
  ModelConfig cfg = config_for(ep);
  cfg.timeout = 50ms;
  cfg.retries = 1;
  HttpChatClient client(cfg);
  EXPECT_EQ(error_of([&] { client.complete("p"); }), Errc::Transport);
  EXPECT_EQ(ep.calls(), 2);
}

TEST(HttpChatClientTest, UnreachableEndpointIsTransport) {
  ModelConfig cfg;
  cfg.name = "m";
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.retries = 1;
  cfg.backoff = 1ms;
  cfg.timeout = 200ms;
  HttpChatClient client(cfg);
  EXPECT_EQ(error_of([&] { client.complete("p"); }), Errc::Transport);
}

TEST(HttpChatClientTest, InFlightRequestsRespectCap) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(40ms);
    res.set_content(completion("ok").dump(), "application/json");
  });
  auto hammer = [&](std::size_t cap) {
    ModelConfig cfg = config_for(ep);
    cfg.max_parallel = cap;
    HttpChatClient client(cfg);
    std::vector<std::jthread> threads;
    for (int i = 0; i < 32; ++i) threads.emplace_back([&] { client.complete("p"); });
  };
  hammer(8);
  EXPECT_LE(ep.max_in_flight(), 8);
  EXPECT_GE(ep.max_in_flight(), 2);
}

// ============================================================================
// Transcripts and replay
// ============================================================================

TEST(Replay, IdenticalResponseEveryTime) {
  auto store = std::make_shared<TranscriptStore>();
  Transcript t;
  t.prompt_hash = prompt_hash("the prompt");
  t.model = "gpt-5";
  t.response = R"j({"distinctions": []})j";
  t.usage = {{"completion_tokens", 500}, {"completion_tokens_details", {{"reasoning_tokens", 487}}}};
  t.finish_reason = "stop";
  t.latency_ms = 1234;
  store->add(t);
  ReplayClient client(store, "gpt-5");
  const ModelResponse a = client.complete("the prompt");
  const ModelResponse b = client.complete("the prompt");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.reasoning_tokens, 487u);
  EXPECT_EQ(a.completion_tokens, 500u);
  EXPECT_EQ(a.latency, 1234ms);
  EXPECT_EQ(error_of([&] { client.complete("another prompt"); }), Errc::Transport);
  ReplayClient other(store, "gpt-4");
  EXPECT_EQ(error_of([&] { other.complete("the prompt"); }), Errc::Transport);
}

TEST(Replay, RecordingThenReplayReproducesResponses) {
  fixture::TempDir dir;
  FakeEndpoint ep([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    const std::string prompt = body["messages"][0]["content"];
    res.set_content(completion("echo " + prompt, prompt == "cut" ? "length" : "stop").dump(),
                    "application/json");
  });
  auto live = std::make_shared<HttpChatClient>(config_for(ep));
  RecordingClient recorder(live, dir.file("t.jsonl"));
  const ModelResponse first = recorder.complete("one");
  const ModelResponse second = recorder.complete("cut");

  auto store = std::make_shared<const TranscriptStore>(TranscriptStore::load(dir.file("t.jsonl")));
  EXPECT_EQ(store->size(), 2u);
  ReplayClient replay(store, "fake-model");
  const ModelResponse r1 = replay.complete("one");
  const ModelResponse r2 = replay.complete("cut");
  EXPECT_EQ(r1.text, first.text);
  EXPECT_EQ(r1.reasoning_tokens, first.reasoning_tokens);
  EXPECT_EQ(r1.usage, first.usage);
  EXPECT_TRUE(r2.truncated);
  EXPECT_EQ(r2.text, second.text);
}

TEST(Replay, StoreRejectsMalformedLines) {
  fixture::TempDir dir;
  fixture::spit(dir.file("t.jsonl"), "{\"prompt_hash\":\"a\",\"model\":\"m\",\"response\":\"r\"}\n{oops\n");
  try {
    TranscriptStore::load(dir.file("t.jsonl"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedLine);
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(TranscriptStore::load(dir.file("missing.jsonl")).size(), 0u);
}
