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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/time/clock.h"
#include "absl/time/time.h"
#include "vidaudit/hashing.h"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

using json = nlohmann::json;

constexpr std::array<const char*, 48> kFillerWords = {
    "quixotic", "zephyr",  "obelisk",  "marmalade", "fjord",    "kumquat",
    "gazebo",   "nebula",  "quasar",   "tundra",    "vortex",   "yodel",
    "walrus",   "xylem",   "jubilee",  "kiosk",     "lagoon",   "mosaic",
    "nectar",   "oracle",  "parsnip",  "quiver",    "rhubarb",  "sphinx",
    "trellis",  "umbra",   "velvet",   "wombat",    "yonder",   "zinnia",
    "acrobat",  "bramble", "cobalt",   "dervish",   "epoch",    "falcon",
    "gossamer", "hemlock", "ivory",    "jasper",    "kelp",     "lantern",
    "mirage",   "nomad",   "orchid",   "pylon",     "quorum",   "saffron"};

std::string FormatTemperature(double t) { return absl::StrFormat("%.17g", t); }

std::string AnnotateTemperature(const absl::Status& s, double tau) {
  return absl::StrCat("generation at temperature ", tau,
                      " failed: ", s.message());
}

}  // namespace

absl::Status ValidateRequest(const GenerationRequest& req) {
  if (req.sample_id.empty()) {
    return absl::InvalidArgumentError("request has empty sample_id");
  }
  if (req.prompt.empty()) {
    return absl::InvalidArgumentError("request has empty prompt");
  }
  if (!std::isfinite(req.temperature) || req.temperature < 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("temperature must be >= 0, got ", req.temperature));
  }
  if (req.max_tokens <= 0) {
    return absl::InvalidArgumentError("max_tokens must be positive");
  }
  return absl::OkStatus();
}

std::string NowRfc3339() {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%E3SZ", absl::Now(),
                          absl::UTCTimeZone());
}

absl::StatusOr<std::pair<GenerationRecord, GenerationRecord>> QueryPair(
    TargetModel& target, const CandidateSample& sample,
    const std::string& prompt, double tau_low, double tau_high,
    int max_tokens) {
  if (!(tau_low < tau_high)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "tau_low (", tau_low, ") must be below tau_high (", tau_high, ")"));
  }
  GenerationRequest req{sample.id, sample.video, prompt, tau_low, max_tokens};
  absl::StatusOr<GenerationRecord> low = target.Generate(req);
  if (!low.ok()) {
    return absl::Status(low.status().code(),
                        AnnotateTemperature(low.status(), tau_low));
  }
  req.temperature = tau_high;
  absl::StatusOr<GenerationRecord> high = target.Generate(req);
  if (!high.ok()) {
    return absl::Status(high.status().code(),
                        AnnotateTemperature(high.status(), tau_high));
  }
  return std::make_pair(*std::move(low), *std::move(high));
}

// --- mock ------------------------------------------------------------------

double MockReplacementFraction(Membership membership, double temperature,
                               const MockModelConfig& config) {
  double f = membership == Membership::kMember
                 ? config.member_slope * temperature
                 : config.nonmember_floor + config.nonmember_slope * temperature;
  return std::clamp(f, 0.0, 1.0);
}

std::string MockGenerate(const std::string& sample_id,
                         const std::string& reference_text,
                         Membership membership, double temperature,
                         uint64_t seed, const MockModelConfig& config) {
  std::vector<std::string> words =
      absl::StrSplit(reference_text, ' ', absl::SkipEmpty());
  const double fraction =
      MockReplacementFraction(membership, temperature, config);
  const size_t n_replace = static_cast<size_t>(
      std::llround(fraction * static_cast<double>(words.size())));
  std::mt19937_64 rng(MixSeed(seed, Fnv1a64(sample_id)));
  std::vector<size_t> positions(words.size());
  for (size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  for (size_t i = 0; i < n_replace && i < positions.size(); ++i) {
    std::uniform_int_distribution<size_t> pick(i, positions.size() - 1);
    std::swap(positions[i], positions[pick(rng)]);
    std::uniform_int_distribution<size_t> filler(0, kFillerWords.size() - 1);
    words[positions[i]] = kFillerWords[filler(rng)];
  }
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

MockTarget::MockTarget(std::string model_id, uint64_t seed,
                       std::map<std::string, MockBinding> bindings,
                       MockModelConfig config)
    : model_id_(std::move(model_id)),
      seed_(seed),
      bindings_(std::move(bindings)),
      config_(config) {}

absl::StatusOr<GenerationRecord> MockTarget::Generate(
    const GenerationRequest& req) {
  RETURN_IF_ERROR(ValidateRequest(req));
  auto it = bindings_.find(req.sample_id);
  if (it == bindings_.end()) {
    return absl::NotFoundError(
        absl::StrCat("mock model has no binding for '", req.sample_id, "'"));
  }
  const uint64_t request_seed = MixSeed(
      seed_, Fnv1a64(absl::StrCat(FormatTemperature(req.temperature), "|",
                                  req.prompt)));
  GenerationRecord rec;
  rec.sample_id = req.sample_id;
  rec.temperature = req.temperature;
  rec.prompt = req.prompt;
  rec.model_id = model_id_;
  rec.max_tokens = req.max_tokens;
  rec.response = MockGenerate(req.sample_id, it->second.reference_text,
                              it->second.membership, req.temperature,
                              request_seed, config_);
  rec.created_at = NowRfc3339();
  rec.meta = json::object({{"backend", "mock"}});
  if (rec.response.empty()) {
    return absl::DataLossError(
        absl::StrCat("empty response for '", req.sample_id, "'"));
  }
  return rec;
}

// --- remote ----------------------------------------------------------------

absl::Status ValidateEndpointConfig(const TargetEndpointConfig& config) {
  RETURN_IF_ERROR(ParseAbsoluteUrl(config.base_url).status());
  if (config.model_id.empty()) {
    return absl::InvalidArgumentError("endpoint model_id is empty");
  }
  if (config.timeout_seconds <= 0) {
    return absl::InvalidArgumentError("timeout_seconds must be positive");
  }
  if (config.max_retries < 0) {
    return absl::InvalidArgumentError("max_retries must be >= 0");
  }
  if (config.requests_per_minute < 1) {
    return absl::InvalidArgumentError("requests_per_minute must be >= 1");
  }
  if (!(config.zero_temperature_fallback > 0.0)) {
    return absl::InvalidArgumentError(
        "zero_temperature_fallback must be positive");
  }
  return absl::OkStatus();
}

json BuildChatRequest(const std::string& model_id,
                      const GenerationRequest& req, double temperature) {
  json content = json::array();
  content.push_back({{"type", "video_url"},
                     {"video_url", {{"url", req.video.path}}}});
  content.push_back({{"type", "text"}, {"text", req.prompt}});
  return json{{"model", model_id},
              {"temperature", temperature},
              {"max_tokens", req.max_tokens},
              {"messages",
               json::array({json{{"role", "user"}, {"content", content}}})}};
}

absl::StatusOr<std::string> ExtractChatResponse(const std::string& body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::DataLossError("response body is not JSON");
  }
  if (!j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    return absl::DataLossError("response has no choices");
  }
  const json& msg = j["choices"][0].value("message", json::object());
  const json content = msg.value("content", json());
  std::string text;
  if (content.is_string()) {
    text = content.get<std::string>();
  } else if (content.is_array()) {
    for (const json& part : content) {
      if (part.is_object() && part.contains("text") &&
          part["text"].is_string()) {
        text += part["text"].get<std::string>();
      }
    }
  }
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    return absl::DataLossError("endpoint returned an empty response");
  }
  return text;
}

RemoteTarget::RemoteTarget(TargetEndpointConfig config,
                           std::shared_ptr<RetryingPoster> poster)
    : config_(std::move(config)), poster_(std::move(poster)) {}

absl::StatusOr<std::string> RemoteTarget::Call(const GenerationRequest& req,
                                               double temperature) {
  HttpHeaders headers;
  if (!config_.auth_token_env.empty()) {
    const char* token = std::getenv(config_.auth_token_env.c_str());
    if (token == nullptr || *token == '\0') {
      return absl::FailedPreconditionError(absl::StrCat(
          "credential environment variable ", config_.auth_token_env,
          " is not set"));
    }
    headers.emplace_back("Authorization", absl::StrCat("Bearer ", token));
  }
  std::string url = config_.base_url;
  if (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  ASSIGN_OR_RETURN(
      HttpResponse resp,
      poster_->Post(url, headers,
                    BuildChatRequest(config_.model_id, req, temperature).dump(),
                    std::chrono::seconds(config_.timeout_seconds)));
  return ExtractChatResponse(resp.body);
}

absl::StatusOr<GenerationRecord> RemoteTarget::Generate(
    const GenerationRequest& req) {
  RETURN_IF_ERROR(ValidateRequest(req));
  json meta = json::object({{"backend", "remote"}});
  absl::StatusOr<std::string> text = Call(req, req.temperature);
  if (!text.ok() && req.temperature == 0.0 &&
      text.status().code() == absl::StatusCode::kInvalidArgument) {
    meta["temperature_substituted"] = config_.zero_temperature_fallback;
    text = Call(req, config_.zero_temperature_fallback);
  }
  if (!text.ok()) return text.status();
  GenerationRecord rec;
  rec.sample_id = req.sample_id;
  rec.temperature = req.temperature;
  rec.prompt = req.prompt;
  rec.model_id = config_.model_id;
  rec.max_tokens = req.max_tokens;
  rec.response = *std::move(text);
  rec.created_at = NowRfc3339();
  rec.meta = std::move(meta);
  return rec;
}

// --- cache -----------------------------------------------------------------

CacheKey CacheKey::ForRequest(const GenerationRequest& req,
                              const std::string& model_id) {
  return CacheKey{req.sample_id, req.temperature, Sha256Hex(req.prompt),
                  model_id, req.max_tokens};
}

CacheKey CacheKey::ForRecord(const GenerationRecord& rec) {
  return CacheKey{rec.sample_id, rec.temperature, Sha256Hex(rec.prompt),
                  rec.model_id, rec.max_tokens};
}

std::string CacheKey::Encode() const {
  return absl::StrCat(sample_id, "\x1f", FormatTemperature(temperature),
                      "\x1f", prompt_sha256, "\x1f", model_id, "\x1f",
                      max_tokens);
}

json RecordToJson(const GenerationRecord& rec) {
  return json{{"sample_id", rec.sample_id},
              {"temperature", rec.temperature},
              {"prompt_sha256", Sha256Hex(rec.prompt)},
              {"prompt", rec.prompt},
              {"model_id", rec.model_id},
              {"max_tokens", rec.max_tokens},
              {"response", rec.response},
              {"created_at", rec.created_at},
              {"meta", rec.meta}};
}

absl::StatusOr<GenerationRecord> RecordFromJson(const json& j) {
  static constexpr std::array<const char*, 9> kFields = {
      "sample_id", "temperature", "prompt_sha256", "prompt", "model_id",
      "max_tokens", "response",   "created_at",    "meta"};
  if (!j.is_object()) return absl::DataLossError("record is not an object");
  for (const char* f : kFields) {
    if (!j.contains(f)) {
      return absl::DataLossError(absl::StrCat("record missing field ", f));
    }
  }
  try {
    GenerationRecord rec;
    rec.sample_id = j.at("sample_id").get<std::string>();
    rec.temperature = j.at("temperature").get<double>();
    rec.prompt = j.at("prompt").get<std::string>();
    rec.model_id = j.at("model_id").get<std::string>();
    rec.max_tokens = j.at("max_tokens").get<int>();
    rec.response = j.at("response").get<std::string>();
    rec.created_at = j.at("created_at").get<std::string>();
    rec.meta = j.at("meta");
    if (Sha256Hex(rec.prompt) != j.at("prompt_sha256").get<std::string>()) {
      return absl::DataLossError("prompt_sha256 does not match prompt");
    }
    return rec;
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("bad record: ", e.what()));
  }
}

absl::StatusOr<std::unique_ptr<GenerationCache>> GenerationCache::Open(
    const std::string& path) {
  std::unique_ptr<GenerationCache> cache(new GenerationCache(path));
  std::ifstream in(path);
  if (!in) {
    std::ofstream create(path, std::ios::app);
    if (!create) {
      return absl::PermissionDeniedError(
          absl::StrCat("cannot create cache file ", path));
    }
    return cache;
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    absl::StatusOr<GenerationRecord> rec =
        j.is_discarded() ? absl::DataLossError("not JSON") : RecordFromJson(j);
    if (!rec.ok()) {
      return absl::DataLossError(absl::StrCat(path, ":", line_no, ": ",
                                              rec.status().message()));
    }
    cache->index_.emplace(CacheKey::ForRecord(*rec).Encode(), *std::move(rec));
  }
  return cache;
}

std::optional<GenerationRecord> GenerationCache::Lookup(
    const CacheKey& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(key.Encode());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

absl::Status GenerationCache::Append(const GenerationRecord& rec) {
  std::string key = CacheKey::ForRecord(rec).Encode();
  std::lock_guard<std::mutex> lock(mu_);
  if (index_.count(key) > 0) return absl::OkStatus();
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot append to cache file ", path_));
  }
  out << RecordToJson(rec).dump() << '\n';
  out.flush();
  if (!out) return absl::DataLossError("short write to cache file");
  index_.emplace(std::move(key), rec);
  return absl::OkStatus();
}

size_t GenerationCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return index_.size();
}

absl::StatusOr<GenerationRecord> CachingTarget::Generate(
    const GenerationRequest& req) {
  RETURN_IF_ERROR(ValidateRequest(req));
  CacheKey key = CacheKey::ForRequest(req, inner_->model_id());
  if (std::optional<GenerationRecord> hit = cache_->Lookup(key)) return *hit;
  inner_calls_.fetch_add(1);
  ASSIGN_OR_RETURN(GenerationRecord rec, inner_->Generate(req));
  RETURN_IF_ERROR(cache_->Append(rec));
  return rec;
}

}  // namespace vidaudit
