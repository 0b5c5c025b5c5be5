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
#include <random>

#include "absl/strings/str_cat.h"
#include "vidaudit/classifiers.h"
#include "classifiers_internal.h"

namespace vidaudit {
namespace {

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

namespace internal {

absl::Status ValidateTrainingData(std::span<const FeatureRow> x,
                                  std::span<const int> y) {
  if (x.size() != y.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "feature rows (", x.size(), ") and labels (", y.size(),
        ") differ in length"));
  }
  if (x.size() < 2) {
    return absl::InvalidArgumentError("need at least 2 training rows");
  }
  size_t positives = 0;
  for (int label : y) {
    if (label != 0 && label != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("labels must be 0 or 1, got ", label));
    }
    positives += static_cast<size_t>(label);
  }
  if (positives == 0 || positives == y.size()) {
    return absl::FailedPreconditionError(
        "training labels contain a single class");
  }
  for (const FeatureRow& r : x) {
    for (double v : r) {
      if (!std::isfinite(v)) {
        return absl::InvalidArgumentError("non-finite feature value");
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace internal

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LinearModel::Margin(const FeatureRow& x) const {
  double z = bias;
  for (int j = 0; j < kFeatureDim; ++j) z += weights[j] * x[j];
  return z;
}

double LogisticObjective(const LinearModel& model,
                         std::span<const FeatureRow> x,
                         std::span<const int> y, double l2) {
  double loss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double z = model.Margin(x[i]);
    loss += Softplus(z) - y[i] * z;
  }
  loss /= static_cast<double>(x.size());
  double sq = 0.0;
  for (double w : model.weights) sq += w * w;
  return loss + 0.5 * l2 * sq;
}

LinearModel LogisticGradient(const LinearModel& model,
                             std::span<const FeatureRow> x,
                             std::span<const int> y, double l2) {
  LinearModel g;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = Sigmoid(model.Margin(x[i])) - y[i];
    for (int j = 0; j < kFeatureDim; ++j) g.weights[j] += r * x[i][j];
    g.bias += r;
  }
  const double n = static_cast<double>(x.size());
  for (int j = 0; j < kFeatureDim; ++j) {
    g.weights[j] = g.weights[j] / n + l2 * model.weights[j];
  }
  g.bias /= n;
  return g;
}

absl::StatusOr<LinearModel> FitLogisticRegression(
    std::span<const FeatureRow> x, std::span<const int> y,
    const LogisticRegressionOptions& options) {
  absl::Status valid = internal::ValidateTrainingData(x, y);
  if (!valid.ok()) return valid;
  LinearModel model;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const LinearModel g = LogisticGradient(model, x, y, options.l2);
    double norm = g.bias * g.bias;
    for (double v : g.weights) norm += v * v;
    if (std::sqrt(norm) < options.tol) break;
    for (int j = 0; j < kFeatureDim; ++j) {
      model.weights[j] -= options.learning_rate * g.weights[j];
    }
    model.bias -= options.learning_rate * g.bias;
  }
  return model;
}

// Pegasos: stochastic subgradient steps of size 1 / (l2 * t) on
// hinge loss + (l2 / 2) |w|^2. The bias is learned as the weight of a
// constant input and is regularised along with w.
absl::StatusOr<LinearModel> FitLinearSvm(std::span<const FeatureRow> x,
                                         std::span<const int> y,
                                         const SvmOptions& options,
                                         uint64_t seed) {
  absl::Status valid = internal::ValidateTrainingData(x, y);
  if (!valid.ok()) return valid;
  if (!(options.l2 > 0.0)) {
    return absl::InvalidArgumentError("SVM l2 must be positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  LinearModel model;
  int64_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i : order) {
      ++t;
      const double eta = 1.0 / (options.l2 * static_cast<double>(t));
      const double label = y[i] == 1 ? 1.0 : -1.0;
      const double margin = label * model.Margin(x[i]);
      const double shrink = 1.0 - eta * options.l2;
      for (double& w : model.weights) w *= shrink;
      model.bias *= shrink;
      if (margin < 1.0) {
        for (int j = 0; j < kFeatureDim; ++j) {
          model.weights[j] += eta * label * x[i][j];
        }
        model.bias += eta * label;
      }
    }
  }
  return model;
}

}  // namespace vidaudit
