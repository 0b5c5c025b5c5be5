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
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "absl/strings/str_cat.h"
#include "vidaudit/evaluation.h"
#include "vidaudit/feature_io.h"
#include "vidaudit/hashing.h"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

using json = nlohmann::json;

constexpr uint64_t kSplitStream = 0x53504c4954ULL;  // "SPLIT"
constexpr int kMaxSplitAttempts = 100;

size_t TrainCount(size_t n, double fraction) {
  const auto k = static_cast<size_t>(std::llround(fraction * n));
  return std::clamp<size_t>(k, 1, n - 1);
}

bool HasBothClasses(std::span<const int> labels,
                    const std::vector<size_t>& idx) {
  bool pos = false, neg = false;
  for (size_t i : idx) (labels[i] == 1 ? pos : neg) = true;
  return pos && neg;
}

struct SeedResult {
  absl::Status status;
  std::vector<SeedMetrics> metrics;
};

SeedResult RunOneSeed(std::span<const FeatureRow> rows,
                      std::span<const int> labels, uint64_t seed,
                      const ProtocolOptions& options) {
  SeedResult result;
  absl::StatusOr<SplitIndices> split = SplitDataset(
      labels, SplitSpec{seed, options.train_fraction, options.stratified});
  if (!split.ok()) {
    result.status = split.status();
    return result;
  }
  std::vector<FeatureRow> train_x, test_x;
  std::vector<int> train_y, test_y;
  for (size_t i : split->train) {
    train_x.push_back(rows[i]);
    train_y.push_back(labels[i]);
  }
  for (size_t i : split->test) {
    test_x.push_back(rows[i]);
    test_y.push_back(labels[i]);
  }
  for (size_t k = 0; k < options.classifiers.size(); ++k) {
    const ClassifierKind kind = options.classifiers[k];
    absl::StatusOr<TrainedAttackModel> model =
        TrainAttackModel(kind, train_x, train_y, options.classifier_options,
                         MixSeed(seed, static_cast<uint64_t>(kind) + 1));
    if (!model.ok()) {
      result.status = model.status();
      return result;
    }
    const std::vector<double> scores = model->Score(test_x);
    absl::StatusOr<double> auc = Auc(scores, test_y);
    absl::StatusOr<double> acc =
        Accuracy(scores, test_y, model->DecisionThreshold());
    if (!auc.ok() || !acc.ok()) {
      result.status = auc.ok() ? acc.status() : auc.status();
      return result;
    }
    result.metrics.push_back(SeedMetrics{seed, kind, *auc, *acc});
  }
  return result;
}

void MeanAndPopulationStd(const std::vector<double>& v, double* mean,
                          double* sd) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  var /= static_cast<double>(v.size());
  *mean = m;
  *sd = std::sqrt(var);
}

}  // namespace

std::vector<uint64_t> ProtocolOptions::DefaultSeeds() {
  std::vector<uint64_t> seeds(100);
  std::iota(seeds.begin(), seeds.end(), 0);
  return seeds;
}

absl::StatusOr<SplitIndices> SplitDataset(std::span<const int> labels,
                                          const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "train_fraction must be in (0, 1), got ", spec.train_fraction));
  }
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(i);
  }
  if (pos.size() < 2 || neg.size() < 2) {
    return absl::FailedPreconditionError(absl::StrCat(
        "need at least 2 rows per class to split, got ", pos.size(),
        " members and ", neg.size(), " non-members"));
  }
  std::mt19937_64 rng(MixSeed(spec.seed, kSplitStream));
  SplitIndices out;
  if (spec.stratified) {
    for (std::vector<size_t>* cls : {&neg, &pos}) {
      std::shuffle(cls->begin(), cls->end(), rng);
      const size_t k = TrainCount(cls->size(), spec.train_fraction);
      out.train.insert(out.train.end(), cls->begin(), cls->begin() + k);
      out.test.insert(out.test.end(), cls->begin() + k, cls->end());
    }
  } else {
    std::vector<size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    const size_t k = TrainCount(all.size(), spec.train_fraction);
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt >= kMaxSplitAttempts) {
        return absl::FailedPreconditionError(absl::StrCat(
            "no split with both classes on each side after ",
            kMaxSplitAttempts, " attempts"));
      }
      std::shuffle(all.begin(), all.end(), rng);
      out.train.assign(all.begin(), all.begin() + k);
      out.test.assign(all.begin() + k, all.end());
      if (HasBothClasses(labels, out.train) &&
          HasBothClasses(labels, out.test)) {
        break;
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

absl::StatusOr<EvaluationReport> RunProtocol(
    std::span<const FeatureVector> features, const ProtocolOptions& options) {
  if (options.classifiers.empty()) {
    return absl::InvalidArgumentError("no classifiers requested");
  }
  if (options.seeds.empty()) {
    return absl::InvalidArgumentError("no seeds requested");
  }
  std::vector<FeatureRow> rows;
  std::vector<int> labels;
  for (const FeatureVector& f : features) {
    if (!f.label) {
      return absl::InvalidArgumentError(
          absl::StrCat("sample '", f.sample_id, "' has no label"));
    }
    rows.push_back(f.AsRow());
    labels.push_back(ToBit(*f.label));
  }

  std::vector<SeedResult> results(options.seeds.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < options.seeds.size();
         i = next.fetch_add(1)) {
      results[i] = RunOneSeed(rows, labels, options.seeds[i], options);
    }
  };
  const int n_threads = std::clamp<int>(
      options.workers, 1, static_cast<int>(options.seeds.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  // Reduce in ascending seed order.
  std::vector<size_t> order(options.seeds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return options.seeds[a] < options.seeds[b];
  });

  EvaluationReport report;
  for (size_t i : order) {
    if (!results[i].status.ok()) {
      return absl::Status(
          results[i].status.code(),
          absl::StrCat("seed ", options.seeds[i], " (index ", i,
                       "): ", results[i].status.message()));
    }
    report.per_seed.insert(report.per_seed.end(), results[i].metrics.begin(),
                           results[i].metrics.end());
    report.seeds.push_back(options.seeds[i]);
  }
  for (ClassifierKind kind : options.classifiers) {
    std::vector<double> aucs, accs;
    for (const SeedMetrics& m : report.per_seed) {
      if (m.kind != kind) continue;
      aucs.push_back(m.auc);
      accs.push_back(m.accuracy);
    }
    ClassifierSummary s;
    s.kind = kind;
    MeanAndPopulationStd(aucs, &s.mean_auc, &s.std_auc);
    MeanAndPopulationStd(accs, &s.mean_acc, &s.std_acc);
    report.summaries.push_back(s);
  }
  report.n_runs = static_cast<int>(options.seeds.size());
  report.train_fraction = options.train_fraction;
  report.stratified = options.stratified;
  report.n_samples = static_cast<int>(features.size());
  report.dataset_fingerprint = Sha256Hex(FeatureCsv(features));
  return report;
}

const ClassifierSummary* EvaluationReport::Find(ClassifierKind kind) const {
  for (const ClassifierSummary& s : summaries) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

json EvaluationReport::ToJson() const {
  json classifiers = json::object();
  json order = json::array();
  for (const ClassifierSummary& s : summaries) {
    classifiers[ClassifierName(s.kind)] = json{{"mean_auc", s.mean_auc},
                                               {"std_auc", s.std_auc},
                                               {"mean_acc", s.mean_acc},
                                               {"std_acc", s.std_acc}};
    order.push_back(ClassifierName(s.kind));
  }
  return json{{"classifiers", std::move(classifiers)},
              {"classifier_order", std::move(order)},
              {"n_runs", n_runs},
              {"seeds", seeds},
              {"train_fraction", train_fraction},
              {"stratified", stratified},
              {"n_samples", n_samples},
              {"std_definition", "population"},
              {"dataset_fingerprint", dataset_fingerprint}};
}

std::string EvaluationReport::PerSeedCsv() const {
  std::string out = "seed,classifier,auc,accuracy\n";
  for (const SeedMetrics& m : per_seed) {
    absl::StrAppend(&out, m.seed, ",", ClassifierName(m.kind), ",",
                    FormatReal(m.auc), ",", FormatReal(m.accuracy), "\n");
  }
  return out;
}

}  // namespace vidaudit
