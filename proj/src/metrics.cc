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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "vidaudit/evaluation.h"

namespace vidaudit {
namespace {

absl::Status CheckMetricInputs(std::span<const double> scores,
                               std::span<const int> labels, size_t* n_pos) {
  if (scores.size() != labels.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "scores (", scores.size(), ") and labels (", labels.size(),
        ") differ in length"));
  }
  size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("labels must be 0 or 1, got ", l));
    }
    pos += static_cast<size_t>(l);
  }
  if (pos == 0 || pos == labels.size()) {
    return absl::FailedPreconditionError(
        "metric is undefined when only one class is present");
  }
  for (double s : scores) {
    if (std::isnan(s)) return absl::InvalidArgumentError("score is NaN");
  }
  *n_pos = pos;
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<double> Auc(std::span<const double> scores,
                           std::span<const int> labels) {
  size_t n_pos = 0;
  absl::Status valid = CheckMetricInputs(scores, labels, &n_pos);
  if (!valid.ok()) return valid;
  const size_t n = scores.size();
  const size_t n_neg = n - n_pos;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Ranks are 1-based; a tie group spanning ranks [i+1, j] gets the average
  // (i + 1 + j) / 2. Twice the rank is an integer, so accumulate that.
  double twice_rank_sum_pos = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double twice_avg_rank = static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) twice_rank_sum_pos += twice_avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  // 2U = 2 * sum(ranks+) - n+(n+ + 1)
  const double twice_u = twice_rank_sum_pos - p * (p + 1.0);
  return twice_u / (2.0 * p * static_cast<double>(n_neg));
}

absl::StatusOr<double> Accuracy(std::span<const double> scores,
                                std::span<const int> labels,
                                double threshold) {
  size_t n_pos = 0;
  absl::Status valid = CheckMetricInputs(scores, labels, &n_pos);
  if (!valid.ok()) return valid;
  size_t correct = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] > threshold ? 1 : 0;
    correct += predicted == labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

}  // namespace vidaudit
