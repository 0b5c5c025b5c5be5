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

#ifndef VIDAUDIT_TARGET_CLIENT_H_
#define VIDAUDIT_TARGET_CLIENT_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "vidaudit/features.h"
#include "vidaudit/http_transport.h"

namespace vidaudit {

inline constexpr char kDefaultPrompt[] = "Please describe this video in detail.";
inline constexpr double kDefaultTauLow = 0.0;
inline constexpr double kDefaultTauHigh = 0.8;
inline constexpr int kDefaultMaxTokens = 256;

struct GenerationRequest {
  std::string sample_id;
  VideoRef video;
  std::string prompt;
  // 0 requests greedy decoding.
  double temperature = 0.0;
  int max_tokens = kDefaultMaxTokens;
};

absl::Status ValidateRequest(const GenerationRequest& req);

// One observed (sample, temperature, prompt) -> response. Only text is
// observable; there is deliberately no field for scores or logits.
struct GenerationRecord {
  std::string sample_id;
  double temperature = 0.0;
  std::string prompt;
  std::string model_id;
  int max_tokens = kDefaultMaxTokens;
  std::string response;
  std::string created_at;  // RFC 3339, UTC
  nlohmann::json meta = nlohmann::json::object();
};

// The black-box target. Implementations must be safe to call from several
// worker threads at once.
class TargetModel {
 public:
  virtual ~TargetModel() = default;
  virtual absl::StatusOr<GenerationRecord> Generate(
      const GenerationRequest& req) = 0;
  virtual std::string model_id() const = 0;
};

// Queries `target` once at each temperature with the same prompt. Errors are
// annotated with the temperature that failed.
absl::StatusOr<std::pair<GenerationRecord, GenerationRecord>> QueryPair(
    TargetModel& target, const CandidateSample& sample,
    const std::string& prompt, double tau_low, double tau_high,
    int max_tokens = kDefaultMaxTokens);

std::string NowRfc3339();

// ---------------------------------------------------------------------------
// Deterministic test double.
//
// The mock copies the reference text and overwrites a fraction of its words
// with seeded filler words. Members start from an exact copy at temperature 0
// and degrade quickly as temperature rises; non-members start slightly off
// and degrade slowly.

struct MockModelConfig {
  double member_slope = 0.6;
  double nonmember_floor = 0.15;
  double nonmember_slope = 0.2;
};

// Fraction of reference words replaced, clamped to [0, 1].
double MockReplacementFraction(Membership membership, double temperature,
                               const MockModelConfig& config = {});

std::string MockGenerate(const std::string& sample_id,
                         const std::string& reference_text,
                         Membership membership, double temperature,
                         uint64_t seed, const MockModelConfig& config = {});

// What the mock "was trained on": the reference text and true membership of
// each sample id it can answer for.
struct MockBinding {
  std::string reference_text;
  Membership membership = Membership::kNonMember;
};

class MockTarget : public TargetModel {
 public:
  MockTarget(std::string model_id, uint64_t seed,
             std::map<std::string, MockBinding> bindings,
             MockModelConfig config = {});

  absl::StatusOr<GenerationRecord> Generate(
      const GenerationRequest& req) override;
  std::string model_id() const override { return model_id_; }

 private:
  std::string model_id_;
  uint64_t seed_;
  std::map<std::string, MockBinding> bindings_;
  MockModelConfig config_;
};

// ---------------------------------------------------------------------------
// Remote chat-completion endpoint.
//
// POST {base_url}/chat/completions
//   {"model": ..., "temperature": ..., "max_tokens": ...,
//    "messages": [{"role": "user", "content": [
//        {"type": "video_url", "video_url": {"url": <video path>}},
//        {"type": "text", "text": <prompt>}]}]}
// Response text: choices[0].message.content (string, or a list of parts
// whose "text" fields are concatenated).

struct TargetEndpointConfig {
  std::string base_url;
  std::string model_id;
  std::string auth_token_env;
  int timeout_seconds = 120;
  int max_retries = 3;
  int requests_per_minute = 30;
  // Sent instead of 0 when the endpoint rejects a zero temperature.
  double zero_temperature_fallback = 0.01;
};

absl::Status ValidateEndpointConfig(const TargetEndpointConfig& config);

nlohmann::json BuildChatRequest(const std::string& model_id,
                                const GenerationRequest& req,
                                double temperature);
absl::StatusOr<std::string> ExtractChatResponse(const std::string& body);

class RemoteTarget : public TargetModel {
 public:
  // The credential is read from the environment on every call and is never
  // stored in records.
  RemoteTarget(TargetEndpointConfig config,
               std::shared_ptr<RetryingPoster> poster);

  absl::StatusOr<GenerationRecord> Generate(
      const GenerationRequest& req) override;
  std::string model_id() const override { return config_.model_id; }

 private:
  absl::StatusOr<std::string> Call(const GenerationRequest& req,
                                   double temperature);

  TargetEndpointConfig config_;
  std::shared_ptr<RetryingPoster> poster_;
};

// ---------------------------------------------------------------------------
// Append-only JSONL replay cache.

struct CacheKey {
  std::string sample_id;
  double temperature = 0.0;
  std::string prompt_sha256;
  std::string model_id;
  int max_tokens = kDefaultMaxTokens;

  static CacheKey ForRequest(const GenerationRequest& req,
                             const std::string& model_id);
  static CacheKey ForRecord(const GenerationRecord& rec);
  std::string Encode() const;
};

nlohmann::json RecordToJson(const GenerationRecord& rec);
absl::StatusOr<GenerationRecord> RecordFromJson(const nlohmann::json& j);

class GenerationCache {
 public:
  // Opens (creating if absent) the cache file and rebuilds the index by
  // scanning it. A malformed line is an error naming the line number.
  static absl::StatusOr<std::unique_ptr<GenerationCache>> Open(
      const std::string& path);

  std::optional<GenerationRecord> Lookup(const CacheKey& key) const;
  // Appends and flushes one line. Records whose key is already present are
  // ignored.
  absl::Status Append(const GenerationRecord& rec);
  size_t size() const;

 private:
  explicit GenerationCache(std::string path) : path_(std::move(path)) {}

  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, GenerationRecord> index_;
};

// Write-through wrapper: hits are served from the cache, misses go to the
// inner target and are appended.
class CachingTarget : public TargetModel {
 public:
  CachingTarget(TargetModel* inner, GenerationCache* cache)
      : inner_(inner), cache_(cache) {}

  absl::StatusOr<GenerationRecord> Generate(
      const GenerationRequest& req) override;
  std::string model_id() const override { return inner_->model_id(); }

  int64_t inner_calls() const { return inner_calls_.load(); }

 private:
  TargetModel* inner_;
  GenerationCache* cache_;
  std::atomic<int64_t> inner_calls_{0};
};

}  // namespace vidaudit

#endif  // VIDAUDIT_TARGET_CLIENT_H_
