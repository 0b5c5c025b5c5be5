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

#ifndef VIDAUDIT_CLOCK_H_
#define VIDAUDIT_CLOCK_H_

#include <chrono>
#include <mutex>

namespace vidaudit {

// Time source used by the rate limiter and retry loop. Tests substitute
// FakeClock so that waiting is simulated rather than real.
class Clock {
 public:
  using Duration = std::chrono::nanoseconds;
  using TimePoint = std::chrono::time_point<std::chrono::steady_clock, Duration>;

  virtual ~Clock() = default;
  virtual TimePoint Now() = 0;
  virtual void SleepFor(Duration d) = 0;

  static Clock* Real();
};

// Sleeping advances the clock instantly.
class FakeClock : public Clock {
 public:
  TimePoint Now() override {
    std::lock_guard<std::mutex> lock(mu_);
    return now_;
  }
  void SleepFor(Duration d) override { Advance(d); }
  void Advance(Duration d) {
    std::lock_guard<std::mutex> lock(mu_);
    if (d.count() > 0) now_ += d;
    total_slept_ += d.count() > 0 ? d : Duration::zero();
  }
  Duration total_slept() {
    std::lock_guard<std::mutex> lock(mu_);
    return total_slept_;
  }

 private:
  std::mutex mu_;
  TimePoint now_{};
  Duration total_slept_{};
};

}  // namespace vidaudit

#endif  // VIDAUDIT_CLOCK_H_
