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

#include "vidaudit/synthetic_oracle.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <unistd.h>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "status_matchers.h"
#include "vidaudit/evaluation.h"
#include "vidaudit/feature_io.h"

namespace vidaudit {
namespace {

using ::vidaudit::testing::StatusIs;

double TempDiffAuc(const std::vector<FeatureVector>& f) {
  std::vector<double> s;
  std::vector<int> y;
  for (const FeatureVector& v : f) {
    s.push_back(v.temp_diff);
    y.push_back(ToBit(*v.label));
  }
  return *Auc(s, y);
}

std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) r[order[k]] = 0.5 * (i + j - 1);
    i = j;
  }
  return r;
}

double Spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> ra = Ranks(a), rb = Ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double num = 0, da = 0, db = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

TEST(AnalyticDriftAucTest, MatchesNormalCdf) {
  // Phi(boost / (sqrt(2) * sd)), reference values from an independent
  // inverse-CDF implementation.
  EXPECT_DOUBLE_EQ(AnalyticDriftAuc(0.0, 0.1), 0.5);
  EXPECT_NEAR(AnalyticDriftAuc(0.1, 0.1), 0.7602499389065233, 1e-12);
  EXPECT_NEAR(AnalyticDriftAuc(0.5, 0.1), 0.9997965239912775, 1e-12);
}

TEST(CalibrateEffectTest, HitsTarget) {
  ASSERT_OK_AND_ASSIGN(OracleConfig cfg, CalibrateEffect(0.68, OracleConfig{}));
  EXPECT_NEAR(cfg.member_drift_boost, 0.06614259848133475, 1e-9);
  EXPECT_NEAR(AnalyticDriftAuc(cfg.member_drift_boost, cfg.noise_sd), 0.68,
              1e-3);
  ASSERT_OK_AND_ASSIGN(OracleConfig null, CalibrateEffect(0.5, OracleConfig{}));
  EXPECT_NEAR(null.member_drift_boost, 0.0, 1e-12);
}

TEST(CalibrateEffectTest, MonotoneInTarget) {
  double previous = -1.0;
  for (double target = 0.5; target < 0.99; target += 0.05) {
    ASSERT_OK_AND_ASSIGN(OracleConfig cfg,
                         CalibrateEffect(target, OracleConfig{}));
    EXPECT_GT(cfg.member_drift_boost, previous);
    previous = cfg.member_drift_boost;
  }
}

TEST(CalibrateEffectTest, Errors) {
  EXPECT_THAT(CalibrateEffect(1.0, OracleConfig{}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(CalibrateEffect(0.4, OracleConfig{}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  OracleConfig noisy;
  noisy.noise_sd = 10.0;
  EXPECT_THAT(CalibrateEffect(0.99, noisy),
              StatusIs(absl::StatusCode::kOutOfRange));
}

TEST(GenerateFeaturesTest, MonteCarloAucMatchesCalibration) {
  ASSERT_OK_AND_ASSIGN(OracleConfig cfg, CalibrateEffect(0.68, OracleConfig{}));
  cfg.n_members = 50000;
  cfg.n_nonmembers = 50000;
  cfg.seed = 11;
  ASSERT_OK_AND_ASSIGN(OracleDataset d, GenerateFeatures(cfg));
  EXPECT_NEAR(TempDiffAuc(d.features), 0.68, 0.005);
  EXPECT_LT(d.clip_rate, 0.01);
}

TEST(GenerateFeaturesTest, LargeBoostSeparates) {
  OracleConfig cfg;
  cfg.member_drift_boost = 5 * cfg.noise_sd;
  cfg.n_members = 50000;
  cfg.n_nonmembers = 50000;
  ASSERT_OK_AND_ASSIGN(OracleDataset d, GenerateFeatures(cfg));
  EXPECT_GT(TempDiffAuc(d.features), 0.95);

  ASSERT_OK_AND_ASSIGN(OracleConfig strong,
                       CalibrateEffect(0.999, OracleConfig{}));
  strong.n_members = 20000;
  strong.n_nonmembers = 20000;
  ASSERT_OK_AND_ASSIGN(OracleDataset s, GenerateFeatures(strong));
  EXPECT_GE(TempDiffAuc(s.features), 0.995);
}

TEST(GenerateFeaturesTest, NullConfigHasNoDriftSignal) {
  OracleConfig cfg;
  cfg.n_members = 50000;
  cfg.n_nonmembers = 50000;
  ASSERT_OK_AND_ASSIGN(OracleDataset d, GenerateFeatures(cfg));
  EXPECT_NEAR(TempDiffAuc(d.features), 0.5, 0.005);
}

TEST(GenerateFeaturesTest, MemberShiftLeavesTempDiffAlone) {
  OracleConfig base;
  base.n_members = 200;
  base.n_nonmembers = 200;
  OracleConfig shifted = base;
  shifted.sim_low_member_shift = 0.1;
  ASSERT_OK_AND_ASSIGN(OracleDataset a, GenerateFeatures(base));
  ASSERT_OK_AND_ASSIGN(OracleDataset b, GenerateFeatures(shifted));
  for (size_t i = 0; i < a.features.size(); ++i) {
    EXPECT_NEAR(b.features[i].temp_diff, a.features[i].temp_diff, 1e-12);
    const double expected_shift = i < 200 ? 0.1 : 0.0;
    EXPECT_NEAR(b.features[i].sim_low - a.features[i].sim_low,
                expected_shift, 1e-12);
  }
}

TEST(GenerateFeaturesTest, LayoutAndDeterminism) {
  OracleConfig cfg;
  cfg.n_members = 3;
  cfg.n_nonmembers = 2;
  cfg.member_drift_boost = 0.2;
  cfg.seed = 5;
  ASSERT_OK_AND_ASSIGN(OracleDataset a, GenerateFeatures(cfg));
  ASSERT_OK_AND_ASSIGN(OracleDataset b, GenerateFeatures(cfg));
  EXPECT_EQ(FeatureCsv(a.features), FeatureCsv(b.features));
  ASSERT_EQ(a.features.size(), 5u);
  EXPECT_EQ(a.features[0].sample_id, "syn_00000");
  EXPECT_EQ(a.features[4].sample_id, "syn_00004");
  EXPECT_EQ(a.features[2].label, Membership::kMember);
  EXPECT_EQ(a.features[3].label, Membership::kNonMember);
  for (const FeatureVector& f : a.features) {
    EXPECT_NEAR(f.complex_temp, f.complexity * f.temp_diff, 1e-15);
    EXPECT_NEAR(f.duration_temp, f.duration_log * f.temp_diff, 1e-15);
  }
  cfg.seed = 6;
  ASSERT_OK_AND_ASSIGN(OracleDataset c, GenerateFeatures(cfg));
  EXPECT_NE(FeatureCsv(a.features), FeatureCsv(c.features));
}

TEST(GenerateFeaturesTest, DifficultyCouplingLowersSimilarity) {
  OracleConfig cfg;
  cfg.n_members = 5000;
  cfg.n_nonmembers = 5000;
  cfg.complexity_coupling = 0.2;
  ASSERT_OK_AND_ASSIGN(OracleDataset d, GenerateFeatures(cfg));
  std::vector<double> complexity, sim_high;
  for (const FeatureVector& f : d.features) {
    complexity.push_back(f.complexity);
    sim_high.push_back(f.sim_low - f.temp_diff);
  }
  EXPECT_LT(Spearman(complexity, sim_high), -0.5);
}

TEST(GenerateFeaturesTest, RejectsInvalidConfig) {
  OracleConfig cfg;
  cfg.noise_sd = 0.0;
  EXPECT_THAT(GenerateFeatures(cfg),
              StatusIs(absl::StatusCode::kInvalidArgument));
  cfg = OracleConfig{};
  cfg.member_drift_boost = -0.1;
  EXPECT_THAT(GenerateFeatures(cfg),
              StatusIs(absl::StatusCode::kInvalidArgument));
  cfg = OracleConfig{};
  cfg.n_nonmembers = 0;
  EXPECT_THAT(GenerateFeatures(cfg),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(RenderTranslatingFramesTest, ShiftsTexture) {
  const auto frames = RenderTranslatingFrames(32, 24, 3, 2, -1, 7);
  ASSERT_EQ(frames.size(), 3u);
  for (int y = 1; y < 20; ++y) {
    for (int x = 0; x < 28; ++x) {
      EXPECT_EQ(frames[1].at(x + 2, y - 1), frames[0].at(x, y));
    }
  }
}

class MockCorpusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::path(::testing::TempDir()) /
           ("corpus_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path dir_;
};

TEST_F(MockCorpusTest, WritesLoadableFramesAndManifest) {
  MockCorpusConfig cfg;
  cfg.n_members = 3;
  cfg.n_nonmembers = 2;
  ASSERT_OK_AND_ASSIGN(MockCorpus corpus, GenerateMockCorpus(cfg, dir_));
  ASSERT_EQ(corpus.samples.size(), 5u);
  EXPECT_EQ(corpus.bindings.size(), 5u);
  EXPECT_TRUE(std::filesystem::exists(corpus.manifest_path));
  EXPECT_TRUE(std::filesystem::exists(corpus.binding_path));
  for (const MockCorpusSample& s : corpus.samples) {
    ASSERT_OK_AND_ASSIGN(FrameSequence seq, LoadFrames(s.sample.video.path));
    EXPECT_EQ(static_cast<int>(seq.frames.size()), s.n_frames);
    EXPECT_DOUBLE_EQ(seq.fps, 4.0);
    EXPECT_GE(s.n_frames, 4);
    EXPECT_LE(s.n_frames, 10);
    EXPECT_LE(std::abs(s.vx), 4);
    EXPECT_LE(std::abs(s.vy), 4);
  }
  EXPECT_EQ(corpus.samples[0].sample.id, "mock_0000");
  EXPECT_EQ(corpus.samples[2].sample.label, Membership::kMember);
  EXPECT_EQ(corpus.samples[3].sample.label, Membership::kNonMember);
  ASSERT_OK_AND_ASSIGN(std::string manifest, ReadFile(corpus.manifest_path));
  EXPECT_THAT(manifest, ::testing::HasSubstr(
                            "\"frames_dir\":\"frames/mock_0000\""));
}

TEST_F(MockCorpusTest, FlowTracksVelocity) {
  MockCorpusConfig cfg;
  cfg.n_members = 10;
  cfg.n_nonmembers = 10;
  cfg.seed = 3;
  ASSERT_OK_AND_ASSIGN(MockCorpus corpus, GenerateMockCorpus(cfg, dir_));
  std::vector<double> speed, flow;
  for (const MockCorpusSample& s : corpus.samples) {
    ASSERT_OK_AND_ASSIGN(DifficultyDescriptors d,
                         ComputeDescriptors(s.sample.video));
    speed.push_back(std::hypot(s.vx, s.vy));
    flow.push_back(d.mean_flow_magnitude);
    EXPECT_NEAR(d.mean_flow_magnitude, speed.back(), 1e-9);
    EXPECT_DOUBLE_EQ(d.duration_seconds, s.n_frames / 4.0);
  }
  EXPECT_GT(Spearman(speed, flow), 0.9);
}

TEST(MockCorpusConfigTest, Validation) {
  MockCorpusConfig cfg;
  cfg.max_frames = 1;
  EXPECT_THAT(ValidateMockCorpusConfig(cfg),
              StatusIs(absl::StatusCode::kInvalidArgument));
  cfg = MockCorpusConfig{};
  cfg.fps = 0;
  EXPECT_THAT(ValidateMockCorpusConfig(cfg),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_OK(ValidateMockCorpusConfig(MockCorpusConfig{}));
}

}  // namespace
}  // namespace vidaudit
