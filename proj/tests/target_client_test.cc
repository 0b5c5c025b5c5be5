// Copyright 2026 The vidaudit Authors
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

#include "vidaudit/target_client.h"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <thread>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "absl/strings/str_split.h"
#include "httplib.h"
#include "status_matchers.h"
#include "vidaudit/clock.h"
#include "vidaudit/http_transport.h"
#include "vidaudit/rate_limiter.h"

namespace vidaudit {
namespace {

using json = nlohmann::json;
using ::testing::HasSubstr;
using ::vidaudit::testing::StatusIs;

constexpr char kReference[] =
    "a person walks across the street while the camera slowly pans toward a "
    "tall building";

std::filesystem::path TempPath(const std::string& name) {
  auto dir = std::filesystem::path(::testing::TempDir()) / "target_client";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

int CountDifferentWords(const std::string& a, const std::string& b) {
  std::vector<std::string> wa = absl::StrSplit(a, ' ');
  std::vector<std::string> wb = absl::StrSplit(b, ' ');
  EXPECT_EQ(wa.size(), wb.size());
  int diff = 0;
  for (size_t i = 0; i < wa.size() && i < wb.size(); ++i) {
    diff += wa[i] != wb[i] ? 1 : 0;
  }
  return diff;
}

CandidateSample Sample(const std::string& id) {
  CandidateSample s;
  s.id = id;
  s.reference_text = kReference;
  s.video.path = "/videos/" + id;
  return s;
}

MockTarget TwoSampleMock() {
  return MockTarget("mock", 3,
                    {{"m", MockBinding{kReference, Membership::kMember}},
                     {"n", MockBinding{kReference, Membership::kNonMember}}});
}

TEST(MockModelTest, ReplacementFractionOracle) {
  EXPECT_DOUBLE_EQ(MockReplacementFraction(Membership::kMember, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(MockReplacementFraction(Membership::kMember, 0.8), 0.48);
  EXPECT_DOUBLE_EQ(MockReplacementFraction(Membership::kNonMember, 0.0), 0.15);
  EXPECT_DOUBLE_EQ(MockReplacementFraction(Membership::kNonMember, 0.8), 0.31);
  EXPECT_DOUBLE_EQ(MockReplacementFraction(Membership::kMember, 5.0), 1.0);
}

TEST(MockModelTest, ReplacesRoundedFractionOfWords) {
  // 15 words: members at 0.8 replace round(0.48 * 15) = 7, non-members at 0
  // replace round(0.15 * 15) = 2.
  EXPECT_EQ(MockGenerate("s", kReference, Membership::kMember, 0.0, 1),
            kReference);
  EXPECT_EQ(CountDifferentWords(
                MockGenerate("s", kReference, Membership::kMember, 0.8, 1),
                kReference),
            7);
  EXPECT_EQ(CountDifferentWords(
                MockGenerate("s", kReference, Membership::kNonMember, 0.0, 1),
                kReference),
            2);
}

TEST(MockModelTest, DeterministicPerSeed) {
  const std::string a = MockGenerate("s", kReference, Membership::kMember, 0.8, 1);
  EXPECT_EQ(a, MockGenerate("s", kReference, Membership::kMember, 0.8, 1));
  EXPECT_NE(a, MockGenerate("s", kReference, Membership::kMember, 0.8, 2));
}

TEST(MockTargetTest, GeneratesRecordsAndRejectsUnknownIds) {
  MockTarget target = TwoSampleMock();
  GenerationRequest req{"m", {}, kDefaultPrompt, 0.0, 64};
  ASSERT_OK_AND_ASSIGN(GenerationRecord rec, target.Generate(req));
  EXPECT_EQ(rec.response, kReference);
  EXPECT_EQ(rec.model_id, "mock");
  EXPECT_EQ(rec.max_tokens, 64);
  EXPECT_EQ(rec.meta["backend"], "mock");
  req.sample_id = "zzz";
  EXPECT_THAT(target.Generate(req), StatusIs(absl::StatusCode::kNotFound));
  req.sample_id = "m";
  req.temperature = -1.0;
  EXPECT_THAT(target.Generate(req),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(QueryPairTest, QueriesBothTemperatures) {
  MockTarget target = TwoSampleMock();
  ASSERT_OK_AND_ASSIGN(auto pair,
                       QueryPair(target, Sample("n"), kDefaultPrompt,
                                 kDefaultTauLow, kDefaultTauHigh));
  EXPECT_EQ(pair.first.temperature, 0.0);
  EXPECT_EQ(pair.second.temperature, 0.8);
  EXPECT_EQ(pair.first.prompt, "Please describe this video in detail.");
}

TEST(QueryPairTest, RejectsOrderAndAnnotatesFailures) {
  MockTarget target = TwoSampleMock();
  EXPECT_THAT(QueryPair(target, Sample("m"), kDefaultPrompt, 0.8, 0.8),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(QueryPair(target, Sample("missing"), kDefaultPrompt, 0.0, 0.8),
              StatusIs(absl::StatusCode::kNotFound, HasSubstr("temperature 0")));
}

// ---------------------------------------------------------------------------
// Cache.

GenerationRecord MakeRecord(const std::string& id, double t) {
  GenerationRecord r;
  r.sample_id = id;
  r.temperature = t;
  r.prompt = kDefaultPrompt;
  r.model_id = "m1";
  r.response = "text for " + id;
  r.created_at = "2026-01-01T00:00:00.000Z";
  return r;
}

TEST(GenerationCacheTest, PersistsAcrossReopen) {
  const auto path = TempPath("persist.jsonl");
  {
    ASSERT_OK_AND_ASSIGN(auto cache, GenerationCache::Open(path.string()));
    ASSERT_OK(cache->Append(MakeRecord("a", 0.0)));
    ASSERT_OK(cache->Append(MakeRecord("a", 0.8)));
    ASSERT_OK(cache->Append(MakeRecord("a", 0.8)));  // duplicate ignored
    EXPECT_EQ(cache->size(), 2u);
  }
  ASSERT_OK_AND_ASSIGN(auto cache, GenerationCache::Open(path.string()));
  EXPECT_EQ(cache->size(), 2u);
  std::optional<GenerationRecord> hit =
      cache->Lookup(CacheKey::ForRecord(MakeRecord("a", 0.8)));
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->response, "text for a");
  EXPECT_EQ(hit->created_at, "2026-01-01T00:00:00.000Z");
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2);
}

TEST(GenerationCacheTest, KeyCoversEveryRequestField) {
  GenerationRecord base = MakeRecord("a", 0.0);
  const std::string k = CacheKey::ForRecord(base).Encode();
  GenerationRecord r = base;
  r.temperature = 1e-17;
  EXPECT_NE(CacheKey::ForRecord(r).Encode(), k);
  r = base;
  r.prompt += " ";
  EXPECT_NE(CacheKey::ForRecord(r).Encode(), k);
  r = base;
  r.model_id = "m2";
  EXPECT_NE(CacheKey::ForRecord(r).Encode(), k);
  r = base;
  r.max_tokens = 1;
  EXPECT_NE(CacheKey::ForRecord(r).Encode(), k);
}

TEST(GenerationCacheTest, MalformedLineNamesLineNumber) {
  const auto path = TempPath("bad.jsonl");
  {
    std::ofstream out(path);
    out << RecordToJson(MakeRecord("a", 0.0)).dump() << "\n{not json\n";
  }
  EXPECT_THAT(GenerationCache::Open(path.string()),
              StatusIs(absl::StatusCode::kDataLoss, HasSubstr(":2:")));
}

TEST(GenerationCacheTest, PromptHashMismatchIsDataLoss) {
  json j = RecordToJson(MakeRecord("a", 0.0));
  j["prompt"] = "tampered";
  EXPECT_THAT(RecordFromJson(j), StatusIs(absl::StatusCode::kDataLoss));
  j.erase("meta");
  EXPECT_THAT(RecordFromJson(j),
              StatusIs(absl::StatusCode::kDataLoss, HasSubstr("meta")));
}

TEST(CachingTargetTest, SecondPassMakesNoInnerCalls) {
  const auto path = TempPath("caching.jsonl");
  MockTarget inner = TwoSampleMock();
  ASSERT_OK_AND_ASSIGN(auto cache, GenerationCache::Open(path.string()));
  CachingTarget target(&inner, cache.get());
  for (const char* id : {"m", "n"}) {
    ASSERT_OK(QueryPair(target, Sample(id), kDefaultPrompt, 0.0, 0.8).status());
  }
  EXPECT_EQ(target.inner_calls(), 4);
  ASSERT_OK_AND_ASSIGN(auto reopened, GenerationCache::Open(path.string()));
  CachingTarget again(&inner, reopened.get());
  ASSERT_OK_AND_ASSIGN(auto pair,
                       QueryPair(again, Sample("m"), kDefaultPrompt, 0.0, 0.8));
  EXPECT_EQ(again.inner_calls(), 0);
  EXPECT_EQ(pair.first.response, kReference);
}

// ---------------------------------------------------------------------------
// Remote endpoint against scripted and local transports.

class ScriptedTransport : public HttpTransport {
 public:
  void Push(absl::StatusOr<HttpResponse> r) { script_.push_back(std::move(r)); }

  absl::StatusOr<HttpResponse> Post(const std::string& url,
                                    const HttpHeaders& headers,
                                    const std::string& body,
                                    std::chrono::seconds) override {
    urls.push_back(url);
    bodies.push_back(json::parse(body));
    this->headers.push_back(headers);
    if (script_.empty()) return absl::UnavailableError("script exhausted");
    auto r = script_.front();
    script_.pop_front();
    return r;
  }

  std::vector<std::string> urls;
  std::vector<json> bodies;
  std::vector<HttpHeaders> headers;

 private:
  std::deque<absl::StatusOr<HttpResponse>> script_;
};

HttpResponse Chat(const std::string& text) {
  return HttpResponse{
      200, json{{"choices", {{{"message", {{"content", text}}}}}}}.dump()};
}

struct RemoteFixture {
  std::shared_ptr<ScriptedTransport> transport =
      std::make_shared<ScriptedTransport>();
  FakeClock clock;
  std::shared_ptr<RetryingPoster> poster;
  std::unique_ptr<RemoteTarget> target;

  explicit RemoteFixture(int max_retries = 3) {
    BackoffPolicy policy;
    policy.max_retries = max_retries;
    poster = std::make_shared<RetryingPoster>(
        transport, std::make_shared<RateLimiter>(1000, &clock), &clock, policy,
        42);
    TargetEndpointConfig cfg;
    cfg.base_url = "http://endpoint.test/v1/";
    cfg.model_id = "video-model";
    target = std::make_unique<RemoteTarget>(cfg, poster);
  }
};

GenerationRequest Request(double t) {
  return GenerationRequest{"s1", {VideoRef::Kind::kFrameDirectory, "/v/s1"},
                           kDefaultPrompt, t, 128};
}

TEST(RemoteTargetTest, SendsChatCompletionRequest) {
  RemoteFixture f;
  f.transport->Push(Chat("a caption"));
  ASSERT_OK_AND_ASSIGN(GenerationRecord rec, f.target->Generate(Request(0.8)));
  EXPECT_EQ(rec.response, "a caption");
  EXPECT_EQ(rec.model_id, "video-model");
  EXPECT_EQ(rec.meta["backend"], "remote");
  ASSERT_EQ(f.transport->urls.size(), 1u);
  EXPECT_EQ(f.transport->urls[0], "http://endpoint.test/v1/chat/completions");
  const json& body = f.transport->bodies[0];
  EXPECT_EQ(body["model"], "video-model");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.8);
  EXPECT_EQ(body["max_tokens"], 128);
  EXPECT_EQ(body["messages"][0]["content"][0]["video_url"]["url"], "/v/s1");
  EXPECT_EQ(body["messages"][0]["content"][1]["text"], kDefaultPrompt);
}

TEST(RemoteTargetTest, ZeroTemperatureFallsBackOnRejection) {
  RemoteFixture f;
  f.transport->Push(HttpResponse{400, "temperature must be positive"});
  f.transport->Push(Chat("greedy-ish"));
  ASSERT_OK_AND_ASSIGN(GenerationRecord rec, f.target->Generate(Request(0.0)));
  EXPECT_EQ(rec.temperature, 0.0);
  EXPECT_DOUBLE_EQ(rec.meta["temperature_substituted"].get<double>(), 0.01);
  ASSERT_EQ(f.transport->bodies.size(), 2u);
  EXPECT_DOUBLE_EQ(f.transport->bodies[1]["temperature"].get<double>(), 0.01);
}

TEST(RemoteTargetTest, NonZeroTemperatureRejectionIsNotRetried) {
  RemoteFixture f;
  f.transport->Push(HttpResponse{400, "bad"});
  EXPECT_THAT(f.target->Generate(Request(0.8)),
              StatusIs(absl::StatusCode::kInvalidArgument, HasSubstr("400")));
  EXPECT_EQ(f.poster->attempts(), 1);
}

TEST(RemoteTargetTest, RetriesServerErrorsWithBackoff) {
  RemoteFixture f;
  f.transport->Push(HttpResponse{500, "oops"});
  f.transport->Push(HttpResponse{503, "busy"});
  f.transport->Push(Chat("finally"));
  ASSERT_OK_AND_ASSIGN(GenerationRecord rec, f.target->Generate(Request(0.8)));
  EXPECT_EQ(rec.response, "finally");
  EXPECT_EQ(f.poster->attempts(), 3);
  // Waits of 1 s and 2 s, each scaled by a jitter factor in [0.8, 1.2].
  const double slept =
      std::chrono::duration<double>(f.clock.total_slept()).count();
  EXPECT_GE(slept, 0.8 * 3.0);
  EXPECT_LE(slept, 1.2 * 3.0);
}

TEST(RemoteTargetTest, GivesUpAfterMaxRetries) {
  RemoteFixture f(/*max_retries=*/2);
  for (int i = 0; i < 5; ++i) f.transport->Push(HttpResponse{502, "down"});
  EXPECT_THAT(f.target->Generate(Request(0.8)),
              StatusIs(absl::StatusCode::kInternal));
  EXPECT_EQ(f.poster->attempts(), 3);
}

TEST(RemoteTargetTest, TransportErrorsAreRetriedThenUnavailable) {
  RemoteFixture f(/*max_retries=*/1);
  EXPECT_THAT(f.target->Generate(Request(0.8)),
              StatusIs(absl::StatusCode::kUnavailable));
  EXPECT_EQ(f.poster->attempts(), 2);
}

TEST(RemoteTargetTest, AuthFailureFailsFast) {
  RemoteFixture f;
  f.transport->Push(HttpResponse{401, "no"});
  EXPECT_THAT(f.target->Generate(Request(0.8)),
              StatusIs(absl::StatusCode::kUnauthenticated));
  EXPECT_EQ(f.poster->attempts(), 1);
}

TEST(RemoteTargetTest, CredentialComesFromEnvironment) {
  auto transport = std::make_shared<ScriptedTransport>();
  FakeClock clock;
  auto poster = std::make_shared<RetryingPoster>(transport, nullptr, &clock,
                                                 BackoffPolicy{});
  TargetEndpointConfig cfg;
  cfg.base_url = "http://endpoint.test";
  cfg.model_id = "m";
  cfg.auth_token_env = "VIDAUDIT_TEST_TOKEN_UNSET";
  unsetenv("VIDAUDIT_TEST_TOKEN_UNSET");
  RemoteTarget target(cfg, poster);
  EXPECT_THAT(target.Generate(Request(0.8)),
              StatusIs(absl::StatusCode::kFailedPrecondition,
                       HasSubstr("VIDAUDIT_TEST_TOKEN_UNSET")));
  setenv("VIDAUDIT_TEST_TOKEN_UNSET", "sekret", 1);
  transport->Push(Chat("ok"));
  ASSERT_OK_AND_ASSIGN(GenerationRecord rec, target.Generate(Request(0.8)));
  ASSERT_EQ(transport->headers.size(), 1u);
  EXPECT_THAT(transport->headers[0],
              ::testing::Contains(std::make_pair(std::string("Authorization"),
                                                 std::string("Bearer sekret"))));
  EXPECT_EQ(RecordToJson(rec).dump().find("sekret"), std::string::npos);
  unsetenv("VIDAUDIT_TEST_TOKEN_UNSET");
}

TEST(ExtractChatResponseTest, AcceptsStringOrParts) {
  EXPECT_EQ(*ExtractChatResponse(Chat("hi").body), "hi");
  json parts = {{"choices",
                 {{{"message",
                    {{"content",
                      {{{"type", "text"}, {"text", "a "}},
                       {{"type", "text"}, {"text", "b"}}}}}}}}}};
  EXPECT_EQ(*ExtractChatResponse(parts.dump()), "a b");
  EXPECT_THAT(ExtractChatResponse(Chat("  ").body),
              StatusIs(absl::StatusCode::kDataLoss));
  EXPECT_THAT(ExtractChatResponse("{}"), StatusIs(absl::StatusCode::kDataLoss));
  EXPECT_THAT(ExtractChatResponse("<html>"),
              StatusIs(absl::StatusCode::kDataLoss));
}

TEST(HttpErrorToStatusTest, MapsStatusClasses) {
  EXPECT_EQ(HttpErrorToStatus({422, ""}).code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(HttpErrorToStatus({403, ""}).code(),
            absl::StatusCode::kPermissionDenied);
  EXPECT_EQ(HttpErrorToStatus({404, ""}).code(), absl::StatusCode::kNotFound);
  EXPECT_EQ(HttpErrorToStatus({429, ""}).code(),
            absl::StatusCode::kResourceExhausted);
  EXPECT_EQ(HttpErrorToStatus({599, ""}).code(), absl::StatusCode::kInternal);
  const absl::Status long_body = HttpErrorToStatus({500, std::string(500, 'x')});
  EXPECT_LT(long_body.message().size(), 260u);
}

TEST(ParseAbsoluteUrlTest, SplitsComponents) {
  ASSERT_OK_AND_ASSIGN(ParsedUrl u,
                       ParseAbsoluteUrl("https://host:8443/v1/chat"));
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.host_port, "host:8443");
  EXPECT_EQ(u.path, "/v1/chat");
  EXPECT_EQ(ParseAbsoluteUrl("http://h")->path, "/");
  EXPECT_THAT(ParseAbsoluteUrl("ftp://h/x"),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(RateLimiterTest, SlidingWindowWithFakeClock) {
  FakeClock clock;
  RateLimiter limiter(2, &clock);
  for (int i = 0; i < 5; ++i) limiter.Acquire();
  // Grants at 0, 0, 60, 60, 120 seconds.
  EXPECT_EQ(clock.total_slept(), std::chrono::seconds(120));
}

TEST(RateLimiterTest, NoWaitBelowLimit) {
  FakeClock clock;
  RateLimiter limiter(30, &clock);
  for (int i = 0; i < 30; ++i) limiter.Acquire();
  EXPECT_EQ(clock.total_slept(), Clock::Duration::zero());
  limiter.Acquire();
  EXPECT_EQ(clock.total_slept(), std::chrono::seconds(60));
}

class LocalServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   ++requests_;
                   json body = json::parse(req.body);
                   if (req.get_header_value("Authorization") !=
                       "Bearer local-token") {
                     res.status = 401;
                     return;
                   }
                   if (body["temperature"].get<double>() == 0.0) {
                     res.status = 400;
                     res.set_content("{\"error\":\"temperature\"}",
                                     "application/json");
                     return;
                   }
                   res.set_content(
                       Chat(absl::StrCat("caption at ",
                                         body["temperature"].get<double>()))
                           .body,
                       "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

TEST_F(LocalServerTest, EndToEndOverHttp) {
  setenv("VIDAUDIT_LOCAL_TOKEN", "local-token", 1);
  TargetEndpointConfig cfg;
  cfg.base_url = absl::StrCat("http://127.0.0.1:", port_, "/v1");
  cfg.model_id = "local";
  cfg.auth_token_env = "VIDAUDIT_LOCAL_TOKEN";
  ASSERT_OK(ValidateEndpointConfig(cfg));
  auto poster = std::make_shared<RetryingPoster>(
      MakeHttplibTransport(), std::make_shared<RateLimiter>(600, Clock::Real()),
      Clock::Real(), BackoffPolicy{});
  RemoteTarget target(cfg, poster);
  ASSERT_OK_AND_ASSIGN(auto pair,
                       QueryPair(target, Sample("x"), kDefaultPrompt, 0.0, 0.8));
  EXPECT_EQ(pair.first.response, "caption at 0.01");
  EXPECT_EQ(pair.first.meta["temperature_substituted"], 0.01);
  EXPECT_EQ(pair.second.response, "caption at 0.8");
  EXPECT_EQ(requests_.load(), 3);
  unsetenv("VIDAUDIT_LOCAL_TOKEN");
}

}  // namespace
}  // namespace vidaudit
