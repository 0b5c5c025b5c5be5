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

#ifndef VIDAUDIT_EMBEDDING_H_
#define VIDAUDIT_EMBEDDING_H_

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "vidaudit/features.h"
#include "vidaudit/http_transport.h"

namespace vidaudit {

struct EmbedderConfig {
  enum class Kind { kRemote, kHashing };
  Kind kind = Kind::kHashing;
  // Remote only.
  std::string base_url;
  std::string model_id;
  std::string auth_token_env;
  int timeout_seconds = 60;
  int max_retries = 3;
  int requests_per_minute = 120;
  int max_chars = 2000;
  // Hashing only.
  int dim = 256;
  bool normalize = true;
};

absl::Status ValidateEmbedderConfig(const EmbedderConfig& config);

// Per-element result of a batch call; a failing element does not abort the
// batch.
using EmbeddingResult = absl::StatusOr<EmbeddingVector>;

class Embedder {
 public:
  virtual ~Embedder() = default;

  // Empty or whitespace-only text is FailedPrecondition (degenerate input).
  virtual absl::StatusOr<EmbeddingVector> Embed(
      const std::string& text) const = 0;

  // InvalidArgument on an empty list.
  virtual absl::StatusOr<std::vector<EmbeddingResult>> EmbedBatch(
      const std::vector<std::string>& texts) const;

  virtual int dim() const = 0;
};

// Lowercased alphanumeric runs, in order.
std::vector<std::string> Tokenize(std::string_view text);

// Feature-hashing bag of words: each token adds +/-1 at a hashed slot, the
// sign coming from an independent hash; the result is optionally L2
// normalized.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(int dim = 256, bool normalize = true);

  absl::StatusOr<EmbeddingVector> Embed(const std::string& text) const override;
  int dim() const override { return dim_; }

 private:
  int dim_;
  bool normalize_;
};

// POST {base_url}/embeddings with {"model": ..., "input": [texts]};
// expects {"data": [{"embedding": [...]}, ...]} in input order.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(EmbedderConfig config,
                 std::shared_ptr<RetryingPoster> poster);

  absl::StatusOr<EmbeddingVector> Embed(const std::string& text) const override;
  absl::StatusOr<std::vector<EmbeddingResult>> EmbedBatch(
      const std::vector<std::string>& texts) const override;
  // 0 until the first successful call fixes it.
  int dim() const override;

 private:
  EmbedderConfig config_;
  std::shared_ptr<RetryingPoster> poster_;
  mutable std::mutex mu_;
  mutable int dim_ = 0;
};

// Builds the configured embedder. `transport` and `limiter` are used by the
// remote kind only; pass nullptr to get a real httplib transport and a
// private limiter.
absl::StatusOr<std::unique_ptr<Embedder>> MakeEmbedder(
    const EmbedderConfig& config,
    std::shared_ptr<HttpTransport> transport = nullptr,
    std::shared_ptr<RateLimiter> limiter = nullptr);

}  // namespace vidaudit

#endif  // VIDAUDIT_EMBEDDING_H_
