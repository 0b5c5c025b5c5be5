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

#ifndef VIDAUDIT_HTTP_TRANSPORT_H_
#define VIDAUDIT_HTTP_TRANSPORT_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "vidaudit/clock.h"
#include "vidaudit/rate_limiter.h"

namespace vidaudit {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// Minimal POST-only transport. A returned error status means the request
// never produced an HTTP response (connection refused, timeout, ...); any
// response, including 4xx/5xx, is returned as a value.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual absl::StatusOr<HttpResponse> Post(const std::string& url,
                                            const HttpHeaders& headers,
                                            const std::string& body,
                                            std::chrono::seconds timeout) = 0;
};

// cpp-httplib backed transport. Supports http:// and https:// URLs.
std::unique_ptr<HttpTransport> MakeHttplibTransport();

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host_port;
  std::string path;  // always begins with '/'
};
absl::StatusOr<ParsedUrl> ParseAbsoluteUrl(const std::string& url);

// Exponential backoff with multiplicative jitter: attempt k (0-based) waits
// base * factor^k * U(1 - jitter, 1 + jitter).
struct BackoffPolicy {
  double base_seconds = 1.0;
  double factor = 2.0;
  double jitter = 0.2;
  int max_retries = 3;
};

// Shared plumbing for every remote call: rate limiting, retries on transport
// errors and 5xx, fail-fast on 4xx. Thread-safe.
class RetryingPoster {
 public:
  RetryingPoster(std::shared_ptr<HttpTransport> transport,
                 std::shared_ptr<RateLimiter> limiter, Clock* clock,
                 BackoffPolicy policy, uint64_t jitter_seed = 0);

  // Returns a 2xx response. Transport failure after all retries is
  // Unavailable; a non-success status maps through HttpErrorToStatus.
  absl::StatusOr<HttpResponse> Post(const std::string& url,
                                    const HttpHeaders& headers,
                                    const std::string& body,
                                    std::chrono::seconds timeout);

  // Number of requests handed to the transport, including retries.
  int64_t attempts() const;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<RateLimiter> limiter_;
  Clock* clock_;
  BackoffPolicy policy_;
  mutable std::mutex mu_;
  std::mt19937_64 jitter_rng_;
  int64_t attempts_ = 0;
};

// Maps an HTTP error status onto an absl status carrying the status code and
// the first 200 bytes of the body.
absl::Status HttpErrorToStatus(const HttpResponse& response);

}  // namespace vidaudit

#endif  // VIDAUDIT_HTTP_TRANSPORT_H_
