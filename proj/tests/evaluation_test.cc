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

#include "vidaudit/evaluation.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "status_matchers.h"
#include "vidaudit/feature_io.h"
#include "vidaudit/hashing.h"

namespace vidaudit {
namespace {

using ::testing::HasSubstr;
using ::vidaudit::testing::StatusIs;

double BruteForceAuc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

std::vector<FeatureVector> NoisyFeatures(int n, double signal, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<FeatureVector> out;
  for (int i = 0; i < n; ++i) {
    FeatureVector f;
    f.sample_id = "s" + std::to_string(i);
    const int bit = i % 2;
    f.label = bit ? Membership::kMember : Membership::kNonMember;
    f.sim_low = noise(rng);
    f.temp_diff = noise(rng) + signal * bit;
    f.complexity = noise(rng);
    f.duration_log = noise(rng);
    f.complex_temp = f.complexity * f.temp_diff;
    f.duration_temp = f.duration_log * f.temp_diff;
    out.push_back(f);
  }
  return out;
}

TEST(AucTest, WorkedExamples) {
  std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  std::vector<int> y = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(*Auc(s, y), 1.0);
  std::vector<double> reversed = {0.9, 0.8, 0.2, 0.1};
  EXPECT_DOUBLE_EQ(*Auc(reversed, y), 0.0);
  std::vector<double> tied(4, 0.3);
  EXPECT_DOUBLE_EQ(*Auc(tied, y), 0.5);
  // One positive above both negatives, one tied with a negative: 3.5 / 4.
  std::vector<double> partial = {0.1, 0.5, 0.5, 0.9};
  EXPECT_DOUBLE_EQ(*Auc(partial, y), 0.875);
}

TEST(AucTest, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 40;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = level(rng) / 3.0;
      y[i] = level(rng) % 2;
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(*Auc(s, y), BruteForceAuc(s, y), 1e-12) << "trial " << trial;
  }
}

TEST(AucTest, InvariantUnderMonotoneTransformAndComplementsNegation) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> s, exp_s, affine, cube, negated;
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) {
    y.push_back(i % 3 == 0);
    s.push_back(noise(rng) + 0.5 * y.back());
    exp_s.push_back(std::exp(s.back()));
    affine.push_back(3.0 * s.back() + 1.0);
    cube.push_back(s.back() * s.back() * s.back());
    negated.push_back(-s.back());
  }
  const double auc = *Auc(s, y);
  EXPECT_EQ(*Auc(exp_s, y), auc);
  EXPECT_EQ(*Auc(affine, y), auc);
  EXPECT_EQ(*Auc(cube, y), auc);
  EXPECT_EQ(auc + *Auc(negated, y), 1.0);
}

TEST(AucTest, Errors) {
  std::vector<double> s = {0.1, 0.2};
  std::vector<int> one_class = {1, 1};
  EXPECT_THAT(Auc(s, one_class),
              StatusIs(absl::StatusCode::kFailedPrecondition));
  std::vector<int> short_y = {1};
  EXPECT_THAT(Auc(s, short_y), StatusIs(absl::StatusCode::kInvalidArgument));
  std::vector<double> nan = {0.1, std::nan("")};
  std::vector<int> y = {0, 1};
  EXPECT_THAT(Auc(nan, y), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(AccuracyTest, WorkedExamples) {
  std::vector<double> s = {0.6, 0.4, 0.7};
  std::vector<int> y = {1, 0, 0};
  EXPECT_NEAR(*Accuracy(s, y, 0.5), 2.0 / 3.0, 1e-15);
  // Scores equal to the threshold predict non-member.
  std::vector<double> at = {0.5, 0.5};
  std::vector<int> ya = {0, 1};
  EXPECT_DOUBLE_EQ(*Accuracy(at, ya, 0.5), 0.5);
  std::vector<double> margins = {-1.0, 2.0};
  EXPECT_DOUBLE_EQ(*Accuracy(margins, ya, 0.0), 1.0);
  std::vector<double> empty;
  std::vector<int> ye;
  EXPECT_THAT(Accuracy(empty, ye, 0.5),
              StatusIs(absl::StatusCode::kFailedPrecondition));
}

std::vector<int> Labels(int pos, int neg) {
  std::vector<int> y;
  for (int i = 0; i < pos; ++i) y.push_back(1);
  for (int i = 0; i < neg; ++i) y.push_back(0);
  return y;
}

TEST(SplitTest, StratifiedPartition) {
  const std::vector<int> y = Labels(35, 65);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    ASSERT_OK_AND_ASSIGN(SplitIndices s, SplitDataset(y, {seed, 0.7, true}));
    std::set<size_t> all(s.train.begin(), s.train.end());
    for (size_t i : s.test) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), y.size());
    int train_pos = 0;
    for (size_t i : s.train) train_pos += y[i];
    // round(0.7 * 35) = 25, round(0.7 * 65) = 46.
    EXPECT_EQ(train_pos, 25);
    EXPECT_EQ(s.train.size(), 71u);
    EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  }
}

TEST(SplitTest, ClampsTinyClassesAndKeepsBothClassesUnstratified) {
  const std::vector<int> tiny = Labels(2, 2);
  ASSERT_OK_AND_ASSIGN(SplitIndices s, SplitDataset(tiny, {1, 0.99, true}));
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);

  const std::vector<int> y = Labels(3, 30);
  for (uint64_t seed = 0; seed < 30; ++seed) {
    ASSERT_OK_AND_ASSIGN(SplitIndices u, SplitDataset(y, {seed, 0.7, false}));
    int train_pos = 0, test_pos = 0;
    for (size_t i : u.train) train_pos += y[i];
    for (size_t i : u.test) test_pos += y[i];
    EXPECT_GT(train_pos, 0);
    EXPECT_GT(test_pos, 0);
    EXPECT_LT(train_pos, static_cast<int>(u.train.size()));
    EXPECT_LT(test_pos, static_cast<int>(u.test.size()));
  }
}

TEST(SplitTest, DeterministicPerSeedAndValidated) {
  const std::vector<int> y = Labels(20, 20);
  ASSERT_OK_AND_ASSIGN(auto a, SplitDataset(y, {3, 0.7, true}));
  ASSERT_OK_AND_ASSIGN(auto b, SplitDataset(y, {3, 0.7, true}));
  ASSERT_OK_AND_ASSIGN(auto c, SplitDataset(y, {4, 0.7, true}));
  EXPECT_EQ(a.train, b.train);
  EXPECT_NE(a.train, c.train);
  EXPECT_THAT(SplitDataset(y, {0, 1.0, true}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(SplitDataset(Labels(1, 10), {0, 0.7, true}),
              StatusIs(absl::StatusCode::kFailedPrecondition));
}

ProtocolOptions SmallProtocol() {
  ProtocolOptions opt;
  opt.seeds = {0, 1, 2, 3, 4};
  opt.classifier_options.rf.n_trees = 20;
  opt.classifier_options.mlp.epochs = 100;
  return opt;
}

TEST(ProtocolTest, DeterministicAcrossWorkerCounts) {
  const auto features = NoisyFeatures(80, 1.5, 1);
  ProtocolOptions one = SmallProtocol();
  ProtocolOptions four = one;
  four.workers = 4;
  ASSERT_OK_AND_ASSIGN(EvaluationReport a, RunProtocol(features, one));
  ASSERT_OK_AND_ASSIGN(EvaluationReport b, RunProtocol(features, four));
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
  EXPECT_EQ(a.PerSeedCsv(), b.PerSeedCsv());
}

TEST(ProtocolTest, ReportShape) {
  const auto features = NoisyFeatures(60, 2.0, 2);
  ProtocolOptions opt = SmallProtocol();
  opt.seeds = {4, 2, 0};
  ASSERT_OK_AND_ASSIGN(EvaluationReport r, RunProtocol(features, opt));
  EXPECT_EQ(r.n_runs, 3);
  EXPECT_EQ(r.seeds, (std::vector<uint64_t>{0, 2, 4}));
  EXPECT_EQ(r.per_seed.size(), 12u);
  EXPECT_EQ(r.n_samples, 60);
  EXPECT_EQ(r.dataset_fingerprint, Sha256Hex(FeatureCsv(features)));
  const nlohmann::json j = r.ToJson();
  EXPECT_EQ(j["classifier_order"],
            nlohmann::json({"LR", "RF", "SVM", "MLP"}));
  EXPECT_EQ(j["std_definition"], "population");
  for (const ClassifierSummary& s : r.summaries) {
    std::vector<double> aucs;
    for (const SeedMetrics& m : r.per_seed) {
      if (m.kind == s.kind) aucs.push_back(m.auc);
    }
    double mean = 0, var = 0;
    for (double a : aucs) mean += a;
    mean /= aucs.size();
    for (double a : aucs) var += (a - mean) * (a - mean);
    EXPECT_NEAR(s.mean_auc, mean, 1e-12);
    EXPECT_NEAR(s.std_auc, std::sqrt(var / aucs.size()), 1e-12);
    EXPECT_GT(s.mean_auc, 0.75) << ClassifierName(s.kind);
  }
  EXPECT_THAT(r.PerSeedCsv(), ::testing::StartsWith(
                                  "seed,classifier,auc,accuracy\n0,LR,"));
}

TEST(ProtocolTest, NoSignalStaysNearChance) {
  const auto features = NoisyFeatures(200, 0.0, 3);
  ProtocolOptions opt = SmallProtocol();
  opt.classifiers = {ClassifierKind::kLogisticRegression};
  opt.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  ASSERT_OK_AND_ASSIGN(EvaluationReport r, RunProtocol(features, opt));
  EXPECT_NEAR(r.summaries[0].mean_auc, 0.5, 0.08);
}

TEST(ProtocolTest, Errors) {
  auto features = NoisyFeatures(20, 1.0, 4);
  ProtocolOptions opt = SmallProtocol();
  opt.classifiers.clear();
  EXPECT_THAT(RunProtocol(features, opt),
              StatusIs(absl::StatusCode::kInvalidArgument));
  opt = SmallProtocol();
  opt.seeds.clear();
  EXPECT_THAT(RunProtocol(features, opt),
              StatusIs(absl::StatusCode::kInvalidArgument));
  opt = SmallProtocol();
  features[3].label.reset();
  EXPECT_THAT(RunProtocol(features, opt),
              StatusIs(absl::StatusCode::kInvalidArgument, HasSubstr("s3")));
  features = NoisyFeatures(20, 1.0, 4);
  for (auto& f : features) f.label = Membership::kMember;
  features[0].label = Membership::kNonMember;
  EXPECT_THAT(RunProtocol(features, opt),
              StatusIs(absl::StatusCode::kFailedPrecondition,
                       HasSubstr("seed 0")));
}

std::vector<DurationTaggedSample> Pool(const std::vector<double>& durations,
                                       const std::string& prefix) {
  std::vector<DurationTaggedSample> out;
  for (size_t i = 0; i < durations.size(); ++i) {
    DurationTaggedSample s;
    s.sample.id = prefix + std::to_string(i);
    s.duration_seconds = durations[i];
    out.push_back(s);
  }
  return out;
}

TEST(LengthMatchingTest, IdenticalPoolsMatchExactly) {
  const std::vector<double> d = {3, 10, 30, 60, 120, 7.5};
  ASSERT_OK_AND_ASSIGN(
      MatchedPool p, LengthMatchedSample(Pool(d, "m"), Pool(d, "n"), 6, 0.0, 1));
  EXPECT_EQ(p.members.size(), 6u);
  EXPECT_EQ(p.mean_abs_log_gap, 0.0);
  for (size_t i = 0; i < p.members.size(); ++i) {
    EXPECT_EQ(p.members[i].id.substr(1), p.nonmembers[i].id.substr(1));
  }
}

TEST(LengthMatchingTest, ReportsShortfall) {
  const auto m = Pool({10, 20, 30}, "m");
  const auto n = Pool({100, 200, 300}, "n");
  EXPECT_THAT(LengthMatchedSample(m, n, 3, 0.0, 0),
              StatusIs(absl::StatusCode::kFailedPrecondition,
                       HasSubstr("only 0 of 3")));
  EXPECT_THAT(LengthMatchedSample(m, n, 4, 10.0, 0),
              StatusIs(absl::StatusCode::kFailedPrecondition,
                       HasSubstr("too small")));
  EXPECT_THAT(LengthMatchedSample(m, n, 1, -1.0, 0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(LengthMatchedSample(Pool({-2}, "m"), n, 1, 1.0, 0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(LengthMatchingTest, RandomPoolsRespectCaliper) {
  std::mt19937_64 rng(17);
  std::lognormal_distribution<double> member_d(std::log(40.0), 0.7);
  std::lognormal_distribution<double> nonmember_d(std::log(25.0), 0.7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(60), b(120);
    for (double& v : a) v = member_d(rng);
    for (double& v : b) v = nonmember_d(rng);
    auto result = LengthMatchedSample(Pool(a, "m"), Pool(b, "n"), 30, 0.1,
                                      trial);
    ASSERT_OK(result.status()) << "trial " << trial;
    EXPECT_LE(result->mean_abs_log_gap, 0.1);
    std::set<std::string> used;
    for (size_t i = 0; i < result->members.size(); ++i) {
      EXPECT_LE(result->abs_log_gaps[i], 0.1);
      EXPECT_TRUE(used.insert(result->nonmembers[i].id).second);
    }
  }
}

}  // namespace
}  // namespace vidaudit
