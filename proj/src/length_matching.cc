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

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "vidaudit/evaluation.h"
#include "vidaudit/hashing.h"

namespace vidaudit {

absl::StatusOr<MatchedPool> LengthMatchedSample(
    std::span<const DurationTaggedSample> members,
    std::span<const DurationTaggedSample> nonmembers, int n_per_class,
    double caliper, uint64_t seed) {
  if (n_per_class < 1) {
    return absl::InvalidArgumentError("n_per_class must be >= 1");
  }
  if (!(caliper >= 0.0) || !std::isfinite(caliper)) {
    return absl::InvalidArgumentError("caliper must be a finite value >= 0");
  }
  auto log_duration = [](const DurationTaggedSample& s) -> double {
    return std::log1p(s.duration_seconds);
  };
  for (auto pool : {members, nonmembers}) {
    for (const DurationTaggedSample& s : pool) {
      if (!std::isfinite(s.duration_seconds) || s.duration_seconds < 0.0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "sample '", s.sample.id, "' has an invalid duration"));
      }
    }
  }
  if (members.size() < static_cast<size_t>(n_per_class) ||
      nonmembers.size() < static_cast<size_t>(n_per_class)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "pools too small for ", n_per_class, " pairs: ", members.size(),
        " members, ", nonmembers.size(), " non-members"));
  }

  std::vector<size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(MixSeed(seed, 0x4d41544348ULL));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> used(nonmembers.size(), false);
  MatchedPool pool;
  for (size_t m : order) {
    if (pool.members.size() == static_cast<size_t>(n_per_class)) break;
    const double target = log_duration(members[m]);
    size_t best = nonmembers.size();
    double best_gap = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < nonmembers.size(); ++j) {
      if (used[j]) continue;
      const double gap = std::abs(log_duration(nonmembers[j]) - target);
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best == nonmembers.size() || best_gap > caliper) continue;
    used[best] = true;
    pool.members.push_back(members[m].sample);
    pool.nonmembers.push_back(nonmembers[best].sample);
    pool.abs_log_gaps.push_back(best_gap);
  }
  if (pool.members.size() < static_cast<size_t>(n_per_class)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "only ", pool.members.size(), " of ", n_per_class,
        " pairs fall within caliper ", caliper));
  }
  double sum = 0.0;
  for (double g : pool.abs_log_gaps) sum += g;
  pool.mean_abs_log_gap = sum / static_cast<double>(pool.abs_log_gaps.size());
  return pool;
}

}  // namespace vidaudit
