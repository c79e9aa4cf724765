#include "support.hpp"

#include "drpo/errors.hpp"
#include "drpo/llm/cache.hpp"
#include "drpo/llm/http_backend.hpp"
#include "drpo/llm/json_extract.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace drpo;
using namespace drpo::llm;

namespace {

CompletionRequest user_request(Role role, const std::string& text)
{
  CompletionRequest r;
  r.role = role;
  r.messages = {{Speaker::user, text}};
  return r;
}

struct ScriptedGateway {
  std::shared_ptr<MockBackend> mock = std::make_shared<MockBackend>();
  Gateway gateway;

  explicit ScriptedGateway(GatewayOptions options = {}) : gateway(options)
  {
    gateway.bind(drpo::testing::mock_profile(Role::base), mock);
  }
};

} // namespace

TEST(Gateway, ScriptedMockEchoesItsTable)
{
  ScriptedGateway g;
  g.mock->script("hi", "hello");
  EXPECT_EQ(g.gateway.complete(user_request(Role::base, "hi")), "hello");
}

TEST(Gateway, CachedRepeatMakesOneUpstreamCall)
{
  ScriptedGateway g;
  g.mock->script("hi", "hello");
  const auto first = g.gateway.complete(user_request(Role::base, "hi"));
  const auto second = g.gateway.complete(user_request(Role::base, "hi"));
  EXPECT_EQ(first, second);
  EXPECT_EQ(g.mock->calls(), 1u);
  const auto counts = g.gateway.call_ledger().by_role(Role::base);
  EXPECT_EQ(counts.misses, 1u);
  EXPECT_EQ(counts.hits, 1u);
}

TEST(Gateway, FreshLedgerIsEmpty)
{
  Gateway gateway;
  const auto ledger = gateway.call_ledger();
  for (const auto role : kAllRoles) {
    EXPECT_EQ(ledger.by_role(role).calls(), 0u);
  }
  EXPECT_EQ(ledger.total().calls(), 0u);
}

TEST(Gateway, UnboundRoleIsAConfigurationError)
{
  ScriptedGateway g;
  EXPECT_THROW(g.gateway.complete(user_request(Role::evaluator, "hi")), ConfigError);
}

TEST(Gateway, RejectsMalformedRequests)
{
  ScriptedGateway g;
  CompletionRequest empty;
  EXPECT_THROW(g.gateway.complete(empty), std::invalid_argument);
  CompletionRequest assistant_first;
  assistant_first.messages = {{Speaker::assistant, "x"}};
  EXPECT_THROW(g.gateway.complete(assistant_first), std::invalid_argument);
}

TEST(Gateway, SampledAndBypassedRequestsAreNotCached)
{
  ScriptedGateway g;
  g.mock->script("hi", "hello");
  auto hot = user_request(Role::base, "hi");
  hot.temperature = 0.7;
  g.gateway.complete(hot);
  g.gateway.complete(hot);
  auto bypass = user_request(Role::base, "hi");
  bypass.cache_policy = CachePolicy::bypass;
  g.gateway.complete(bypass);
  EXPECT_EQ(g.mock->calls(), 3u);
  const auto counts = g.gateway.call_ledger().total();
  EXPECT_EQ(counts.hits, 0u);
  EXPECT_EQ(counts.bypassed, 3u);
}

TEST(Gateway, DisabledCacheAlwaysGoesUpstream)
{
  GatewayOptions options;
  options.cache_enabled = false;
  ScriptedGateway g(options);
  g.mock->script("hi", "hello");
  g.gateway.complete(user_request(Role::base, "hi"));
  g.gateway.complete(user_request(Role::base, "hi"));
  EXPECT_EQ(g.mock->calls(), 2u);
}

TEST(Gateway, LedgerConservation)
{
  ScriptedGateway g;
  g.mock->script("a", "1");
  g.mock->script("b", "2");
  int invocations = 0;
  for (const auto* text : {"a", "b", "a", "a", "b"}) {
    g.gateway.complete(user_request(Role::base, text));
    ++invocations;
  }
  const auto counts = g.gateway.call_ledger().total();
  EXPECT_EQ(counts.hits + counts.misses, static_cast<std::uint64_t>(invocations));
  EXPECT_EQ(counts.misses, 2u);
}

TEST(Gateway, DiskCacheSurvivesANewGateway)
{
  const auto dir = drpo::testing::scratch_dir("disk-cache");
  GatewayOptions options;
  options.cache_dir = dir;
  {
    ScriptedGateway g(options);
    g.mock->script("hi", "hello");
    g.gateway.complete(user_request(Role::base, "hi"));
  }
  ScriptedGateway g(options);
  g.mock->enable_default_rule(false);
  EXPECT_EQ(g.gateway.complete(user_request(Role::base, "hi")), "hello");
  EXPECT_EQ(g.mock->calls(), 0u);
  const auto files = std::distance(std::filesystem::directory_iterator(dir), {});
  EXPECT_EQ(files, 1);
}

TEST(Gateway, CompleteJsonReasksAfterProseReply)
{
  ScriptedGateway g;
  std::atomic<int> calls{0};
  g.mock->add_rule([&](const MockCall&) -> std::optional<std::string> {
    return ++calls == 1 ? "Sure! Here you go." : "```json\n{\"ok\": \"1\"}\n```";
  });
  const auto value = g.gateway.complete_json(user_request(Role::base, "give json"));
  EXPECT_EQ(value.at("ok"), 1);
  EXPECT_EQ(g.gateway.warnings().count("extraction"), 1u);
  const auto recorded = g.mock->recorded();
  ASSERT_EQ(recorded.size(), 2u);
  ASSERT_EQ(recorded[1].messages.size(), 3u);
  EXPECT_EQ(recorded[1].messages[1].speaker, Speaker::assistant);
  EXPECT_NE(recorded[1].messages[2].text.find("valid JSON only"), std::string::npos);
}

TEST(Gateway, CompleteJsonGivesUpAfterTwoReasks)
{
  ScriptedGateway g;
  g.mock->add_rule([](const MockCall&) -> std::optional<std::string> { return "I refuse."; });
  EXPECT_THROW(g.gateway.complete_json(user_request(Role::base, "give json")), ExtractionError);
  EXPECT_EQ(g.mock->calls(), 3u);
  EXPECT_EQ(g.gateway.warnings().count("extraction"), 3u);
}

TEST(Gateway, CompleteJsonReasksOnceOnSchemaError)
{
  ScriptedGateway g;
  g.mock->add_rule([](const MockCall&) -> std::optional<std::string> { return "{\"a\": 1}"; });
  const auto validate = [](const nlohmann::json& v) {
    if (!v.contains("b")) {
      throw SchemaError("missing b");
    }
  };
  EXPECT_THROW(g.gateway.complete_json(user_request(Role::base, "x"), validate), SchemaError);
  EXPECT_EQ(g.mock->calls(), 2u);
  EXPECT_EQ(g.gateway.warnings().count("schema"), 2u);
}

TEST(Gateway, FailedReplyIsEvictedFromTheCache)
{
  ScriptedGateway g;
  std::atomic<int> calls{0};
  g.mock->add_rule([&](const MockCall& call) -> std::optional<std::string> {
    if (call.messages.size() > 1) {
      return "{\"fixed\": true}";
    }
    return ++calls == 1 ? "no json" : "{\"second\": true}";
  });
  g.gateway.complete_json(user_request(Role::base, "x"));
  const auto again = g.gateway.complete_json(user_request(Role::base, "x"));
  EXPECT_TRUE(again.contains("second"));
}

TEST(Gateway, InFlightLimitIsRespected)
{
  GatewayOptions options;
  options.max_in_flight = 2;
  options.cache_enabled = false;
  ScriptedGateway g(options);
  std::atomic<int> running{0};
  std::atomic<int> peak{0};
  g.mock->add_rule([&](const MockCall&) -> std::optional<std::string> {
    const int now = ++running;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --running;
    return "ok";
  });
  std::vector<std::jthread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { g.gateway.complete(user_request(Role::base, std::to_string(i))); });
  }
  threads.clear();
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(g.mock->calls(), 8u);
}

TEST(MockBackend, DefaultRuleIsDeterministic)
{
  ScriptedGateway a;
  ScriptedGateway b;
  auto request = user_request(Role::base, "tell me something");
  request.stage = Stage::generation;
  EXPECT_EQ(a.gateway.complete(request), b.gateway.complete(request));
}

TEST(MockBackend, NoRuleAndNoDefaultThrows)
{
  ScriptedGateway g;
  g.mock->enable_default_rule(false);
  EXPECT_THROW(g.gateway.complete(user_request(Role::base, "x")), std::runtime_error);
}

TEST(CacheKey, SensitiveToEveryField)
{
  const Messages m{{Speaker::user, "q"}};
  const auto base = CacheKey::of("model", m, 0.0, 100);
  EXPECT_EQ(base, CacheKey::of("model", m, 0.0, 100));
  EXPECT_NE(base, CacheKey::of("other", m, 0.0, 100));
  EXPECT_NE(base, CacheKey::of("model", Messages{{Speaker::user, "r"}}, 0.0, 100));
  EXPECT_NE(base, CacheKey::of("model", Messages{{Speaker::system, "q"}}, 0.0, 100));
  EXPECT_NE(base, CacheKey::of("model", m, 0.5, 100));
  EXPECT_NE(base, CacheKey::of("model", m, 0.0, 101));
}

// Local chat-completions server for wire-format tests.
class HttpFixture : public ::testing::Test {
protected:
  void SetUp() override
  {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      const int n = ++hits_;
      if (n <= failures_) {
        res.status = fail_status_;
        res.set_content("busy", "text/plain");
        return;
      }
      res.set_content(reply_, "application/json");
      res.status = status_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override
  {
    server_.stop();
    thread_.join();
  }

  BackendProfile profile() const
  {
    BackendProfile p;
    p.role = Role::base;
    p.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    p.model_id = "test-model";
    p.max_tokens = 64;
    return p;
  }

  std::string complete(const BackendProfile& p, const Messages& messages)
  {
    HttpBackend backend(RetryPolicy{3, std::chrono::milliseconds(1), 2.0}, std::chrono::seconds(5));
    const nlohmann::json meta = nlohmann::json::object();
    return backend.complete(BackendCall{p, Stage::other, messages, 0.0, 64, meta});
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  int failures_ = 0;
  int fail_status_ = 503;
  int status_ = 200;
  std::string reply_ = R"({"choices":[{"message":{"role":"assistant","content":"pong"}}]})";
  std::string last_body_;
  std::string last_auth_;
};

TEST_F(HttpFixture, SendsChatCompletionBody)
{
  auto p = profile();
  p.api_key_env = "DRPO_TEST_KEY";
  ::setenv("DRPO_TEST_KEY", "secret", 1);
  EXPECT_EQ(complete(p, {{Speaker::system, "be brief"}, {Speaker::user, "ping"}}), "pong");
  const auto body = nlohmann::json::parse(last_body_);
  EXPECT_EQ(body.at("model"), "test-model");
  EXPECT_EQ(body.at("max_tokens"), 64);
  EXPECT_EQ(body.at("temperature"), 0.0);
  ASSERT_EQ(body.at("messages").size(), 2u);
  EXPECT_EQ(body.at("messages")[0].at("role"), "system");
  EXPECT_EQ(body.at("messages")[1].at("content"), "ping");
  EXPECT_EQ(last_auth_, "Bearer secret");
  ::unsetenv("DRPO_TEST_KEY");
}

TEST_F(HttpFixture, RetriesServerErrorsThenSucceeds)
{
  failures_ = 2;
  EXPECT_EQ(complete(profile(), {{Speaker::user, "ping"}}), "pong");
  EXPECT_EQ(hits_.load(), 3);
}

TEST_F(HttpFixture, GivesUpAfterThreeAttempts)
{
  failures_ = 10;
  fail_status_ = 429;
  EXPECT_THROW(complete(profile(), {{Speaker::user, "ping"}}), TransportError);
  EXPECT_EQ(hits_.load(), 3);
}

TEST_F(HttpFixture, ClientErrorIsAProviderErrorWithPayload)
{
  status_ = 400;
  reply_ = R"({"error":{"message":"bad request"}})";
  try {
    complete(profile(), {{Speaker::user, "ping"}});
    FAIL() << "expected ProviderError";
  } catch (const ProviderError& e) {
    EXPECT_NE(e.payload().find("bad request"), std::string::npos);
  }
  EXPECT_EQ(hits_.load(), 1);
}

TEST_F(HttpFixture, EmptyContentIsAProviderError)
{
  reply_ = R"({"choices":[{"message":{"role":"assistant","content":""}}]})";
  EXPECT_THROW(complete(profile(), {{Speaker::user, "ping"}}), ProviderError);
}

TEST_F(HttpFixture, MissingCredentialIsAConfigurationError)
{
  auto p = profile();
  p.api_key_env = "DRPO_TEST_KEY_THAT_IS_NOT_SET";
  ::unsetenv("DRPO_TEST_KEY_THAT_IS_NOT_SET");
  EXPECT_THROW(complete(p, {{Speaker::user, "ping"}}), ConfigError);
  EXPECT_EQ(hits_.load(), 0);
}

TEST(Http, ConnectionRefusedIsATransportError)
{
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");
  probe.stop();
  EXPECT_THROW(post_json("http://127.0.0.1:" + std::to_string(port) + "/x", "{}", "",
                         RetryPolicy{2, std::chrono::milliseconds(1), 2.0}, std::chrono::seconds(1)),
               TransportError);
}

TEST(Http, ParsesUrls)
{
  const auto u = parse_url("https://api.example.com:8443/v1/chat/completions");
  EXPECT_EQ(u.scheme_host_port, "https://api.example.com:8443");
  EXPECT_EQ(u.path, "/v1/chat/completions");
  EXPECT_THROW(parse_url("api.example.com/v1"), ConfigError);
  EXPECT_THROW(parse_url("ftp://host/x"), ConfigError);
}
