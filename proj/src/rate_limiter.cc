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

#include "vidaudit/rate_limiter.h"

#include <algorithm>
#include <thread>

namespace vidaudit {
namespace {

class SystemClock : public Clock {
 public:
  TimePoint Now() override {
    return std::chrono::time_point_cast<Duration>(
        std::chrono::steady_clock::now());
  }
  void SleepFor(Duration d) override {
    if (d.count() > 0) std::this_thread::sleep_for(d);
  }
};

}  // namespace

Clock* Clock::Real() {
  static SystemClock* clock = new SystemClock();
  return clock;
}

RateLimiter::RateLimiter(int requests_per_minute, Clock* clock)
    : limit_(std::max(1, requests_per_minute)), clock_(clock) {}

void RateLimiter::Acquire() {
  constexpr auto kWindow = std::chrono::seconds(60);
  // Waiters sleep while holding the lock; the limit is global so they would
  // be queued behind each other anyway.
  std::lock_guard<std::mutex> lock(mu_);
  for (;;) {
    const Clock::TimePoint now = clock_->Now();
    while (!grants_.empty() && grants_.front() <= now - kWindow) {
      grants_.pop_front();
    }
    if (static_cast<int>(grants_.size()) < limit_) {
      grants_.push_back(now);
      return;
    }
    clock_->SleepFor(grants_.front() + kWindow - now);
  }
}

}  // namespace vidaudit
