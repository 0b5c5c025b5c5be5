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

#include <cmath>
#include <random>
#include <vector>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "status_matchers.h"

namespace vidaudit {
namespace {

using ::testing::HasSubstr;
using ::vidaudit::testing::StatusIs;

TEST(CosineSimilarityTest, HandComputedValues) {
  const std::vector<double> a = {1.0, 0.0};
  const std::vector<double> b = {0.0, 1.0};
  const std::vector<double> c = {1.0, 1.0};
  EXPECT_DOUBLE_EQ(*CosineSimilarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(*CosineSimilarity(a, b), 0.0);
  EXPECT_NEAR(*CosineSimilarity(a, c), 1.0 / std::sqrt(2.0), 1e-15);
  const std::vector<double> neg = {-2.0, 0.0};
  EXPECT_DOUBLE_EQ(*CosineSimilarity(a, neg), -1.0);
}

TEST(CosineSimilarityTest, ScaleInvariantAndBounded) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(8), b(8), scaled(8);
    for (int i = 0; i < 8; ++i) {
      a[i] = n(rng);
      b[i] = n(rng);
      scaled[i] = 3.7 * b[i];
    }
    ASSERT_OK_AND_ASSIGN(double s, CosineSimilarity(a, b));
    ASSERT_OK_AND_ASSIGN(double t, CosineSimilarity(a, scaled));
    EXPECT_NEAR(s, t, 1e-12);
    EXPECT_LE(std::abs(s), 1.0);
    ASSERT_OK_AND_ASSIGN(double self, CosineSimilarity(a, a));
    EXPECT_LE(self, 1.0);
    EXPECT_NEAR(self, 1.0, 1e-12);
  }
}

TEST(CosineSimilarityTest, RejectsMismatchAndZeroNorm) {
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {1.0, 2.0, 3.0};
  const std::vector<double> zero = {0.0, 0.0};
  EXPECT_THAT(CosineSimilarity(a, b),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(CosineSimilarity(a, zero),
              StatusIs(absl::StatusCode::kFailedPrecondition));
}

TEST(TemperatureDriftTest, DifferenceOfSimilarities) {
  EXPECT_NEAR(*TemperatureDrift(0.8, 0.6), 0.2, 1e-15);
  EXPECT_NEAR(*TemperatureDrift(0.3, 0.5), -0.2, 1e-15);
  EXPECT_THAT(TemperatureDrift(std::nan(""), 0.5),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(TemperatureDrift(1.5, 0.5),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(DifficultyTransformsTest, Log1pOfDescriptors) {
  EXPECT_DOUBLE_EQ(*ComplexityFromFlow(0.0), 0.0);
  EXPECT_NEAR(*ComplexityFromFlow(std::exp(1.0) - 1.0), 1.0, 1e-15);
  EXPECT_NEAR(*DurationLog(std::exp(2.0) - 1.0), 2.0, 1e-15);
  EXPECT_THAT(ComplexityFromFlow(-0.1),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DurationLog(-1.0), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(BuildFeatureVectorTest, WorkedExample) {
  DifficultyDescriptors desc{std::exp(1.0) - 1.0, std::exp(2.0) - 1.0};
  ASSERT_OK_AND_ASSIGN(
      FeatureVector f,
      BuildFeatureVector("v1", 0.8, 0.6, desc, Membership::kMember));
  const FeatureRow expected = {0.8, 0.2, 1.0, 2.0, 0.2, 0.4};
  const FeatureRow row = f.AsRow();
  for (int k = 0; k < kFeatureDim; ++k) {
    EXPECT_NEAR(row[k], expected[k], 1e-12) << kFeatureNames[k];
  }
  EXPECT_EQ(f.sample_id, "v1");
  EXPECT_EQ(f.label, Membership::kMember);
}

TEST(BuildFeatureVectorTest, InteractionsAreProducts) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> sim(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double lo = sim(rng), hi = sim(rng);
    DifficultyDescriptors desc{pos(rng), pos(rng)};
    ASSERT_OK_AND_ASSIGN(FeatureVector f,
                         BuildFeatureVector("x", lo, hi, desc, std::nullopt));
    EXPECT_DOUBLE_EQ(f.complex_temp, f.complexity * f.temp_diff);
    EXPECT_DOUBLE_EQ(f.duration_temp, f.duration_log * f.temp_diff);
    EXPECT_DOUBLE_EQ(f.temp_diff, lo - hi);
  }
}

TEST(BuildFeatureVectorTest, RejectsNegativeDescriptors) {
  DifficultyDescriptors desc{-1.0, 3.0};
  EXPECT_THAT(BuildFeatureVector("x", 0.5, 0.4, desc, std::nullopt),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(CandidateSampleTest, Validation) {
  CandidateSample s;
  s.id = "a";
  s.reference_text = "text";
  s.video.path = "/tmp/x";
  EXPECT_OK(ValidateCandidateSample(s));
  s.reference_text = "";
  EXPECT_THAT(ValidateCandidateSample(s),
              StatusIs(absl::StatusCode::kInvalidArgument));
  s.reference_text = "text";
  s.id = "";
  EXPECT_THAT(ValidateCandidateSample(s),
              StatusIs(absl::StatusCode::kInvalidArgument, HasSubstr("id")));
}

TEST(MembershipTest, BitRoundTrip) {
  EXPECT_EQ(ToBit(Membership::kMember), 1);
  EXPECT_EQ(*MembershipFromBit(0), Membership::kNonMember);
  EXPECT_THAT(MembershipFromBit(2),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

}  // namespace
}  // namespace vidaudit
