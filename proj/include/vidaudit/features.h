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

#ifndef VIDAUDIT_FEATURES_H_
#define VIDAUDIT_FEATURES_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace vidaudit {

// Ground-truth membership of a candidate in the target's training data.
enum class Membership : int { kNonMember = 0, kMember = 1 };

inline int ToBit(Membership m) { return static_cast<int>(m); }
absl::StatusOr<Membership> MembershipFromBit(int bit);

// Where the difficulty descriptors of a candidate come from: a directory of
// decoded frames, or a JSON file with precomputed descriptors.
struct VideoRef {
  enum class Kind { kFrameDirectory, kDescriptorFile };
  Kind kind = Kind::kFrameDirectory;
  std::string path;
};

struct CandidateSample {
  std::string id;
  VideoRef video;
  std::string reference_text;
  std::optional<Membership> label;
  std::string source_tag;
};

// Checks the per-sample invariants (non-empty id and reference text).
// Uniqueness of ids is a dataset property and is checked by the manifest
// reader.
absl::Status ValidateCandidateSample(const CandidateSample& sample);

struct EmbeddingVector {
  std::vector<double> values;
  bool normalized = false;
  // Set when the input text was cut to the provider's character cap.
  bool truncated = false;

  int dim() const { return static_cast<int>(values.size()); }
};

// Video-intrinsic difficulty: mean optical-flow magnitude in pixels/frame and
// duration in seconds.
struct DifficultyDescriptors {
  double mean_flow_magnitude = 0.0;
  double duration_seconds = 0.0;
};

absl::Status ValidateDescriptors(const DifficultyDescriptors& desc);

inline constexpr int kFeatureDim = 6;
using FeatureRow = std::array<double, kFeatureDim>;

inline constexpr std::array<const char*, kFeatureDim> kFeatureNames = {
    "sim_low",      "temp_diff",    "complexity",
    "duration_log", "complex_temp", "duration_temp"};

// The attack representation of one candidate. sim_high is consumed while
// building the vector and is not stored.
struct FeatureVector {
  std::string sample_id;
  double sim_low = 0.0;
  double temp_diff = 0.0;
  double complexity = 0.0;
  double duration_log = 0.0;
  double complex_temp = 0.0;
  double duration_temp = 0.0;
  std::optional<Membership> label;

  FeatureRow AsRow() const {
    return {sim_low,      temp_diff,    complexity,
            duration_log, complex_temp, duration_temp};
  }
};

// Cosine of the angle between two vectors. InvalidArgument on dimension
// mismatch, FailedPrecondition when either vector has zero norm. The result
// is clamped to [-1, 1] to absorb rounding.
absl::StatusOr<double> CosineSimilarity(std::span<const double> a,
                                        std::span<const double> b);
absl::StatusOr<double> CosineSimilarity(const EmbeddingVector& a,
                                        const EmbeddingVector& b);

// sim_low - sim_high. Positive when similarity to the reference drops as the
// decoding temperature rises.
absl::StatusOr<double> TemperatureDrift(double sim_low, double sim_high);

// log(1 + flow), natural log.
absl::StatusOr<double> ComplexityFromFlow(double mean_flow_magnitude);

// log(1 + duration), natural log.
absl::StatusOr<double> DurationLog(double duration_seconds);

absl::StatusOr<FeatureVector> BuildFeatureVector(
    std::string sample_id, double sim_low, double sim_high,
    const DifficultyDescriptors& desc, std::optional<Membership> label);

}  // namespace vidaudit

#endif  // VIDAUDIT_FEATURES_H_
