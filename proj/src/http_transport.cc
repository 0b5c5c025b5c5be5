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

#include "vidaudit/http_transport.h"

#include <cmath>
#include <regex>

#include "absl/strings/str_cat.h"
#include "httplib.h"

namespace vidaudit {
namespace {

class HttplibTransport : public HttpTransport {
 public:
  absl::StatusOr<HttpResponse> Post(const std::string& url,
                                    const HttpHeaders& headers,
                                    const std::string& body,
                                    std::chrono::seconds timeout) override {
    absl::StatusOr<ParsedUrl> parsed = ParseAbsoluteUrl(url);
    if (!parsed.ok()) return parsed.status();
    if (parsed->scheme == "https") {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
      return absl::UnimplementedError("https support was not compiled in");
#endif
    }
    httplib::Client client(parsed->scheme + "://" + parsed->host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    httplib::Result res =
        client.Post(parsed->path, h, body, "application/json");
    if (!res) {
      return absl::UnavailableError(absl::StrCat(
          "transport error talking to ", parsed->host_port, ": ",
          httplib::to_string(res.error())));
    }
    return HttpResponse{res->status, res->body};
  }
};

bool Retryable(const absl::StatusOr<HttpResponse>& r) {
  if (!r.ok()) return r.status().code() == absl::StatusCode::kUnavailable;
  return r->status >= 500;
}

}  // namespace

std::unique_ptr<HttpTransport> MakeHttplibTransport() {
  return std::make_unique<HttplibTransport>();
}

absl::StatusOr<ParsedUrl> ParseAbsoluteUrl(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/\s]+)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    return absl::InvalidArgumentError(
        absl::StrCat("not an absolute http(s) URL: '", url, "'"));
  }
  ParsedUrl out{m[1].str(), m[2].str(), m[3].matched ? m[3].str() : "/"};
  return out;
}

absl::Status HttpErrorToStatus(const HttpResponse& response) {
  std::string excerpt = response.body.substr(0, 200);
  std::string msg =
      absl::StrCat("endpoint returned HTTP ", response.status, ": ", excerpt);
  switch (response.status) {
    case 400:
    case 422:
      return absl::InvalidArgumentError(msg);
    case 401:
      return absl::UnauthenticatedError(msg);
    case 403:
      return absl::PermissionDeniedError(msg);
    case 404:
      return absl::NotFoundError(msg);
    case 429:
      return absl::ResourceExhaustedError(msg);
    default:
      break;
  }
  if (response.status >= 500) return absl::InternalError(msg);
  return absl::FailedPreconditionError(msg);
}

RetryingPoster::RetryingPoster(std::shared_ptr<HttpTransport> transport,
                               std::shared_ptr<RateLimiter> limiter,
                               Clock* clock, BackoffPolicy policy,
                               uint64_t jitter_seed)
    : transport_(std::move(transport)),
      limiter_(std::move(limiter)),
      clock_(clock),
      policy_(policy),
      jitter_rng_(jitter_seed) {}

int64_t RetryingPoster::attempts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return attempts_;
}

absl::StatusOr<HttpResponse> RetryingPoster::Post(
    const std::string& url, const HttpHeaders& headers,
    const std::string& body, std::chrono::seconds timeout) {
  absl::StatusOr<HttpResponse> result;
  for (int attempt = 0;; ++attempt) {
    if (limiter_) limiter_->Acquire();
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++attempts_;
    }
    result = transport_->Post(url, headers, body, timeout);
    if (!Retryable(result) || attempt >= policy_.max_retries) break;
    double jitter;
    {
      std::lock_guard<std::mutex> lock(mu_);
      jitter = std::uniform_real_distribution<double>(
          1.0 - policy_.jitter, 1.0 + policy_.jitter)(jitter_rng_);
    }
    double wait = policy_.base_seconds * std::pow(policy_.factor, attempt) *
                  jitter;
    clock_->SleepFor(std::chrono::duration_cast<Clock::Duration>(
        std::chrono::duration<double>(wait)));
  }
  if (!result.ok()) return result.status();
  if (result->status < 200 || result->status >= 300) {
    return HttpErrorToStatus(*result);
  }
  return result;
}

}  // namespace vidaudit
