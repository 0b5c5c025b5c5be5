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

#ifndef VIDAUDIT_CLASSIFIERS_H_
#define VIDAUDIT_CLASSIFIERS_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "vidaudit/features.h"

namespace vidaudit {

enum class ClassifierKind { kLogisticRegression, kSvm, kRandomForest, kMlp };

// "LR", "SVM", "RF", "MLP".
const char* ClassifierName(ClassifierKind kind);
absl::StatusOr<ClassifierKind> ParseClassifierKind(const std::string& name);

// Per-feature z-scoring with population statistics. Columns with zero
// variance get std 1 and are flagged.
class Standardizer {
 public:
  Standardizer() = default;

  // Needs at least two rows. The statistics are copied; later changes to
  // `rows` have no effect.
  static absl::StatusOr<Standardizer> Fit(std::span<const FeatureRow> rows);

  bool fitted() const { return fitted_; }
  const FeatureRow& means() const { return means_; }
  const FeatureRow& stds() const { return stds_; }
  const std::array<bool, kFeatureDim>& degenerate() const {
    return degenerate_;
  }

  // FailedPrecondition before Fit.
  absl::StatusOr<FeatureRow> Apply(const FeatureRow& row) const;
  absl::StatusOr<std::vector<FeatureRow>> Apply(
      std::span<const FeatureRow> rows) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<Standardizer> FromJson(const nlohmann::json& j);

 private:
  bool fitted_ = false;
  FeatureRow means_{};
  FeatureRow stds_{};
  std::array<bool, kFeatureDim> degenerate_{};
};

struct LogisticRegressionOptions {
  double l2 = 1e-3;
  double learning_rate = 0.1;
  int max_iter = 5000;
  double tol = 1e-6;
};

struct SvmOptions {
  double l2 = 1e-2;
  int epochs = 2000;
};

struct RandomForestOptions {
  int n_trees = 100;
  // Negative means unlimited.
  int max_depth = 8;
  int min_leaf = 2;
  bool bootstrap = true;
  // Features drawn per split; ceil(sqrt(6)) = 3.
  int max_features = 3;
};

struct MlpOptions {
  int hidden_units = 16;
  double learning_rate = 0.05;
  int epochs = 500;
};

struct ClassifierOptions {
  LogisticRegressionOptions lr;
  SvmOptions svm;
  RandomForestOptions rf;
  MlpOptions mlp;
};

// Linear scorer w.x + b, shared by LR (through a sigmoid) and SVM (raw
// margin).
struct LinearModel {
  FeatureRow weights{};
  double bias = 0.0;

  double Margin(const FeatureRow& x) const;
};

struct TreeNode {
  // Split nodes: feature >= 0, go left when x[feature] <= threshold.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // Leaves: fraction of positive training rows that reached the leaf.
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double Predict(const FeatureRow& x) const;
};

struct Forest {
  std::vector<DecisionTree> trees;

  double Predict(const FeatureRow& x) const;
};

// One hidden ReLU layer and a sigmoid output unit.
struct MlpModel {
  int hidden = 0;
  std::vector<double> w1;  // hidden x kFeatureDim, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  double Logit(const FeatureRow& x) const;
  double Predict(const FeatureRow& x) const;

  // Parameters in the order w1, b1, w2, b2.
  std::vector<double> Flatten() const;
  static MlpModel Unflatten(int hidden, std::span<const double> flat);
};

double Sigmoid(double z);

// Mean cross-entropy of sigmoid(w.x + b) plus (l2 / 2) * |w|^2, and its
// analytic gradient. The bias is not regularised.
double LogisticObjective(const LinearModel& model,
                         std::span<const FeatureRow> x,
                         std::span<const int> y, double l2);
LinearModel LogisticGradient(const LinearModel& model,
                             std::span<const FeatureRow> x,
                             std::span<const int> y, double l2);

// Mean cross-entropy of the MLP and its gradient by backpropagation.
double MlpObjective(const MlpModel& model, std::span<const FeatureRow> x,
                    std::span<const int> y);
MlpModel MlpGradient(const MlpModel& model, std::span<const FeatureRow> x,
                     std::span<const int> y);

// Glorot-uniform weights, zero biases.
MlpModel InitMlp(int hidden_units, uint64_t seed);

// Low-level fits on already standardised rows. Labels must be 0/1 with both
// classes present.
absl::StatusOr<LinearModel> FitLogisticRegression(
    std::span<const FeatureRow> x, std::span<const int> y,
    const LogisticRegressionOptions& options);
absl::StatusOr<LinearModel> FitLinearSvm(std::span<const FeatureRow> x,
                                         std::span<const int> y,
                                         const SvmOptions& options,
                                         uint64_t seed);
absl::StatusOr<Forest> FitRandomForest(std::span<const FeatureRow> x,
                                       std::span<const int> y,
                                       const RandomForestOptions& options,
                                       uint64_t seed);
absl::StatusOr<MlpModel> FitMlp(std::span<const FeatureRow> x,
                                std::span<const int> y,
                                const MlpOptions& options, uint64_t seed);

// A fitted standardizer + classifier. Scoring is deterministic; LR, RF and
// MLP scores are probabilities, SVM scores are raw margins.
class TrainedAttackModel {
 public:
  using Parameters = std::variant<LinearModel, Forest, MlpModel>;

  TrainedAttackModel(ClassifierKind kind, Standardizer standardizer,
                     Parameters parameters, uint64_t train_seed,
                     nlohmann::json hyperparameters);

  ClassifierKind kind() const { return kind_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const Parameters& parameters() const { return parameters_; }
  uint64_t train_seed() const { return train_seed_; }
  const nlohmann::json& hyperparameters() const { return hyperparameters_; }

  // Scores a raw (unstandardised) feature row.
  double Score(const FeatureRow& raw) const;
  std::vector<double> Score(std::span<const FeatureRow> raw) const;

  // Membership is predicted when Score() > DecisionThreshold(): 0 for SVM
  // margins, 0.5 for probabilities.
  double DecisionThreshold() const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<TrainedAttackModel> FromJson(const nlohmann::json& j);

 private:
  ClassifierKind kind_;
  Standardizer standardizer_;
  Parameters parameters_;
  uint64_t train_seed_;
  nlohmann::json hyperparameters_;
};

nlohmann::json HyperparametersToJson(ClassifierKind kind,
                                     const ClassifierOptions& options);

// Fits the standardizer on `raw` and the requested classifier on the
// standardised rows.
absl::StatusOr<TrainedAttackModel> TrainAttackModel(
    ClassifierKind kind, std::span<const FeatureRow> raw,
    std::span<const int> y, const ClassifierOptions& options, uint64_t seed);

}  // namespace vidaudit

#endif  // VIDAUDIT_CLASSIFIERS_H_
