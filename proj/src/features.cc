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

#include "vidaudit/features.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

absl::Status CheckSimilarity(double s, const char* name) {
  if (!std::isfinite(s)) {
    return absl::InvalidArgumentError(absl::StrCat(name, " is not finite"));
  }
  if (s < -1.0 || s > 1.0) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, " = ", s, " is outside [-1, 1]"));
  }
  return absl::OkStatus();
}

absl::Status CheckNonNegative(double x, const char* name) {
  if (!std::isfinite(x)) {
    return absl::InvalidArgumentError(absl::StrCat(name, " is not finite"));
  }
  if (x < 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, " = ", x, " is negative"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<Membership> MembershipFromBit(int bit) {
  if (bit == 0) return Membership::kNonMember;
  if (bit == 1) return Membership::kMember;
  return absl::InvalidArgumentError(
      absl::StrCat("membership label must be 0 or 1, got ", bit));
}

absl::Status ValidateCandidateSample(const CandidateSample& sample) {
  if (sample.id.empty()) {
    return absl::InvalidArgumentError("sample id is empty");
  }
  if (sample.reference_text.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("sample '", sample.id, "' has empty reference_text"));
  }
  if (sample.video.path.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("sample '", sample.id, "' has no video reference"));
  }
  return absl::OkStatus();
}

absl::Status ValidateDescriptors(const DifficultyDescriptors& desc) {
  RETURN_IF_ERROR(
      CheckNonNegative(desc.mean_flow_magnitude, "mean_flow_magnitude"));
  RETURN_IF_ERROR(CheckNonNegative(desc.duration_seconds, "duration_seconds"));
  return absl::OkStatus();
}

absl::StatusOr<double> CosineSimilarity(std::span<const double> a,
                                        std::span<const double> b) {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "embedding dimension mismatch: ", a.size(), " vs ", b.size()));
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    return absl::FailedPreconditionError(
        "cosine similarity of a zero-norm vector is undefined");
  }
  double cos = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  return std::clamp(cos, -1.0, 1.0);
}

absl::StatusOr<double> CosineSimilarity(const EmbeddingVector& a,
                                        const EmbeddingVector& b) {
  return CosineSimilarity(std::span<const double>(a.values),
                          std::span<const double>(b.values));
}

absl::StatusOr<double> TemperatureDrift(double sim_low, double sim_high) {
  RETURN_IF_ERROR(CheckSimilarity(sim_low, "sim_low"));
  RETURN_IF_ERROR(CheckSimilarity(sim_high, "sim_high"));
  return sim_low - sim_high;
}

absl::StatusOr<double> ComplexityFromFlow(double mean_flow_magnitude) {
  RETURN_IF_ERROR(CheckNonNegative(mean_flow_magnitude, "flow magnitude"));
  return std::log1p(mean_flow_magnitude);
}

absl::StatusOr<double> DurationLog(double duration_seconds) {
  RETURN_IF_ERROR(CheckNonNegative(duration_seconds, "duration"));
  return std::log1p(duration_seconds);
}

absl::StatusOr<FeatureVector> BuildFeatureVector(
    std::string sample_id, double sim_low, double sim_high,
    const DifficultyDescriptors& desc, std::optional<Membership> label) {
  RETURN_IF_ERROR(ValidateDescriptors(desc));
  FeatureVector fv;
  fv.sample_id = std::move(sample_id);
  fv.sim_low = sim_low;
  ASSIGN_OR_RETURN(fv.temp_diff, TemperatureDrift(sim_low, sim_high));
  ASSIGN_OR_RETURN(fv.complexity, ComplexityFromFlow(desc.mean_flow_magnitude));
  ASSIGN_OR_RETURN(fv.duration_log, DurationLog(desc.duration_seconds));
  fv.complex_temp = fv.complexity * fv.temp_diff;
  fv.duration_temp = fv.duration_log * fv.temp_diff;
  fv.label = label;
  return fv;
}

}  // namespace vidaudit
