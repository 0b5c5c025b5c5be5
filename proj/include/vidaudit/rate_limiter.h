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

#ifndef VIDAUDIT_RATE_LIMITER_H_
#define VIDAUDIT_RATE_LIMITER_H_

#include <deque>
#include <mutex>

#include "vidaudit/clock.h"

namespace vidaudit {

// Sliding-window limiter: at most `requests_per_minute` grants inside any
// half-open window (t - 60s, t]. One instance is shared by every client that
// talks to the same service, so the limit is global across workers.
class RateLimiter {
 public:
  RateLimiter(int requests_per_minute, Clock* clock);

  // Blocks (via the clock) until a request may be issued, then records it.
  void Acquire();

  int requests_per_minute() const { return limit_; }

 private:
  const int limit_;
  Clock* clock_;
  std::mutex mu_;
  std::deque<Clock::TimePoint> grants_;
};

}  // namespace vidaudit

#endif  // VIDAUDIT_RATE_LIMITER_H_
