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

#include "vidaudit/embedding.h"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "vidaudit/hashing.h"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

using json = nlohmann::json;

constexpr uint64_t kSignBasis = 0x84222325cbf29ce4ULL;

bool IsBlank(const std::string& text) {
  for (unsigned char c : text) {
    if (!std::isspace(c)) return false;
  }
  return true;
}

absl::Status DegenerateText() {
  return absl::FailedPreconditionError("cannot embed empty text");
}

void NormalizeInPlace(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (double& x : v) x /= norm;
}

}  // namespace

absl::Status ValidateEmbedderConfig(const EmbedderConfig& config) {
  if (config.kind == EmbedderConfig::Kind::kHashing) {
    if (config.dim < 16) {
      return absl::InvalidArgumentError(
          absl::StrCat("hashing embedder needs dim >= 16, got ", config.dim));
    }
    return absl::OkStatus();
  }
  if (config.base_url.empty() || config.model_id.empty()) {
    return absl::InvalidArgumentError(
        "remote embedder requires base_url and model_id");
  }
  RETURN_IF_ERROR(ParseAbsoluteUrl(config.base_url).status());
  if (config.max_chars <= 0) {
    return absl::InvalidArgumentError("max_chars must be positive");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<EmbeddingResult>> Embedder::EmbedBatch(
    const std::vector<std::string>& texts) const {
  if (texts.empty()) {
    return absl::InvalidArgumentError("embed_batch called with no texts");
  }
  std::vector<EmbeddingResult> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(Embed(t));
  return out;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

HashingEmbedder::HashingEmbedder(int dim, bool normalize)
    : dim_(dim), normalize_(normalize) {}

absl::StatusOr<EmbeddingVector> HashingEmbedder::Embed(
    const std::string& text) const {
  std::vector<std::string> tokens = Tokenize(text);
  if (tokens.empty()) return DegenerateText();
  EmbeddingVector out;
  out.values.assign(dim_, 0.0);
  for (const std::string& tok : tokens) {
    const uint64_t slot = Fnv1a64(tok) % static_cast<uint64_t>(dim_);
    const bool negative = (Fnv1a64(tok, kSignBasis) >> 63) != 0;
    out.values[slot] += negative ? -1.0 : 1.0;
  }
  // Colliding tokens with opposite signs can cancel to an all-zero vector.
  bool all_zero = true;
  for (double v : out.values) all_zero = all_zero && v == 0.0;
  if (all_zero) {
    return absl::FailedPreconditionError("hashed embedding is all zero");
  }
  if (normalize_) {
    NormalizeInPlace(out.values);
    out.normalized = true;
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(EmbedderConfig config,
                               std::shared_ptr<RetryingPoster> poster)
    : config_(std::move(config)), poster_(std::move(poster)) {}

int RemoteEmbedder::dim() const {
  std::lock_guard<std::mutex> lock(mu_);
  return dim_;
}

absl::StatusOr<EmbeddingVector> RemoteEmbedder::Embed(
    const std::string& text) const {
  ASSIGN_OR_RETURN(std::vector<EmbeddingResult> batch, EmbedBatch({text}));
  return std::move(batch.front());
}

absl::StatusOr<std::vector<EmbeddingResult>> RemoteEmbedder::EmbedBatch(
    const std::vector<std::string>& texts) const {
  if (texts.empty()) {
    return absl::InvalidArgumentError("embed_batch called with no texts");
  }
  std::vector<EmbeddingResult> out(texts.size(), DegenerateText());
  std::vector<size_t> sent;
  std::vector<bool> truncated(texts.size(), false);
  json input = json::array();
  for (size_t i = 0; i < texts.size(); ++i) {
    if (IsBlank(texts[i])) continue;
    std::string t = texts[i];
    if (static_cast<int>(t.size()) > config_.max_chars) {
      t.resize(config_.max_chars);
      truncated[i] = true;
    }
    input.push_back(std::move(t));
    sent.push_back(i);
  }
  if (sent.empty()) return out;

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
  url += "/embeddings";
  json body{{"model", config_.model_id}, {"input", input}};
  absl::StatusOr<HttpResponse> resp =
      poster_->Post(url, headers, body.dump(),
                    std::chrono::seconds(config_.timeout_seconds));
  if (!resp.ok()) {
    for (size_t i : sent) out[i] = resp.status();
    return out;
  }
  json j = json::parse(resp->body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() ||
      j["data"].size() != sent.size()) {
    return absl::DataLossError(
        "embedding response does not have one entry per input");
  }
  std::lock_guard<std::mutex> lock(mu_);
  for (size_t k = 0; k < sent.size(); ++k) {
    const size_t i = sent[k];
    const json& emb = j["data"][k].value("embedding", json());
    if (!emb.is_array() || emb.empty()) {
      out[i] = absl::DataLossError("embedding entry is missing or empty");
      continue;
    }
    EmbeddingVector v;
    try {
      v.values = emb.get<std::vector<double>>();
    } catch (const json::exception& e) {
      out[i] = absl::DataLossError(absl::StrCat("bad embedding: ", e.what()));
      continue;
    }
    if (dim_ == 0) dim_ = v.dim();
    if (v.dim() != dim_) {
      out[i] = absl::DataLossError(absl::StrCat(
          "embedding dimension changed from ", dim_, " to ", v.dim()));
      continue;
    }
    if (config_.normalize) {
      NormalizeInPlace(v.values);
      v.normalized = true;
    }
    v.truncated = truncated[i];
    out[i] = std::move(v);
  }
  return out;
}

absl::StatusOr<std::unique_ptr<Embedder>> MakeEmbedder(
    const EmbedderConfig& config, std::shared_ptr<HttpTransport> transport,
    std::shared_ptr<RateLimiter> limiter) {
  RETURN_IF_ERROR(ValidateEmbedderConfig(config));
  if (config.kind == EmbedderConfig::Kind::kHashing) {
    return std::make_unique<HashingEmbedder>(config.dim, config.normalize);
  }
  if (!transport) transport = MakeHttplibTransport();
  if (!limiter) {
    limiter =
        std::make_shared<RateLimiter>(config.requests_per_minute, Clock::Real());
  }
  BackoffPolicy policy;
  policy.max_retries = config.max_retries;
  auto poster = std::make_shared<RetryingPoster>(
      std::move(transport), std::move(limiter), Clock::Real(), policy);
  return std::make_unique<RemoteEmbedder>(config, std::move(poster));
}

}  // namespace vidaudit
