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

#ifndef VIDAUDIT_EVALUATION_H_
#define VIDAUDIT_EVALUATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "vidaudit/classifiers.h"
#include "vidaudit/features.h"

namespace vidaudit {

// Area under the ROC curve as the Mann-Whitney statistic
// P(s+ > s-) + P(s+ = s-) / 2, via average ranks in O(n log n).
// FailedPrecondition when only one class is present.
absl::StatusOr<double> Auc(std::span<const double> scores,
                           std::span<const int> labels);

// Fraction of rows where (score > threshold) equals the label.
absl::StatusOr<double> Accuracy(std::span<const double> scores,
                                std::span<const int> labels,
                                double threshold);

struct SplitSpec {
  uint64_t seed = 0;
  double train_fraction = 0.7;
  bool stratified = true;
};

struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> test;
};

// Seeded train/test partition of row indices with both classes on each side.
// Stratified splits take round(fraction * n_c) rows of each class, clamped
// so each side keeps at least one. Unstratified splits reshuffle up to 100
// times until both sides hold both classes.
absl::StatusOr<SplitIndices> SplitDataset(std::span<const int> labels,
                                          const SplitSpec& spec);

struct ProtocolOptions {
  std::vector<ClassifierKind> classifiers = {
      ClassifierKind::kLogisticRegression, ClassifierKind::kRandomForest,
      ClassifierKind::kSvm, ClassifierKind::kMlp};
  std::vector<uint64_t> seeds = DefaultSeeds();
  double train_fraction = 0.7;
  bool stratified = true;
  ClassifierOptions classifier_options;
  int workers = 1;

  // 0..99 inclusive.
  static std::vector<uint64_t> DefaultSeeds();
};

struct SeedMetrics {
  uint64_t seed = 0;
  ClassifierKind kind = ClassifierKind::kLogisticRegression;
  double auc = 0.0;
  double accuracy = 0.0;
};

struct ClassifierSummary {
  ClassifierKind kind = ClassifierKind::kLogisticRegression;
  double mean_auc = 0.0;
  double std_auc = 0.0;  // population standard deviation over seeds
  double mean_acc = 0.0;
  double std_acc = 0.0;
};

struct EvaluationReport {
  std::vector<ClassifierSummary> summaries;  // in configured order
  std::vector<SeedMetrics> per_seed;         // sorted by seed, then kind order
  int n_runs = 0;
  std::vector<uint64_t> seeds;
  double train_fraction = 0.0;
  bool stratified = true;
  int n_samples = 0;
  // sha256 of the canonical feature CSV the report was computed from.
  std::string dataset_fingerprint;

  const ClassifierSummary* Find(ClassifierKind kind) const;
  nlohmann::json ToJson() const;
  // Header: seed,classifier,auc,accuracy
  std::string PerSeedCsv() const;
};

// For every seed: split, fit the standardizer on the training rows only,
// train each classifier, and score the held-out rows. Seeds run on up to
// `workers` threads; aggregation is in seed order so the result does not
// depend on scheduling.
absl::StatusOr<EvaluationReport> RunProtocol(
    std::span<const FeatureVector> features, const ProtocolOptions& options);

// ---------------------------------------------------------------------------
// Length matching.

struct DurationTaggedSample {
  CandidateSample sample;
  double duration_seconds = 0.0;
};

struct MatchedPool {
  std::vector<CandidateSample> members;
  std::vector<CandidateSample> nonmembers;  // nonmembers[i] matches members[i]
  std::vector<double> abs_log_gaps;
  double mean_abs_log_gap = 0.0;
};

// Greedy nearest-neighbour matching on log(1 + duration): members are visited
// in seeded random order, each taking the unused non-member with the smallest
// gap if that gap is within `caliper`. Stops after n_per_class pairs.
// FailedPrecondition reporting the achievable count when fewer pairs exist.
absl::StatusOr<MatchedPool> LengthMatchedSample(
    std::span<const DurationTaggedSample> members,
    std::span<const DurationTaggedSample> nonmembers, int n_per_class,
    double caliper, uint64_t seed);

}  // namespace vidaudit

#endif  // VIDAUDIT_EVALUATION_H_
