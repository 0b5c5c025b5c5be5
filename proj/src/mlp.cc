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
#include <random>

#include "absl/strings/str_cat.h"
#include "classifiers_internal.h"
#include "vidaudit/classifiers.h"

namespace vidaudit {
namespace {

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

MlpModel ZerosLike(const MlpModel& m) {
  MlpModel g;
  g.hidden = m.hidden;
  g.w1.assign(m.w1.size(), 0.0);
  g.b1.assign(m.b1.size(), 0.0);
  g.w2.assign(m.w2.size(), 0.0);
  g.b2 = 0.0;
  return g;
}

// One forward/backward pass over the batch. Returns the mean loss and, when
// `grad` is non-null, accumulates the mean gradient into it.
double ForwardBackward(const MlpModel& m, std::span<const FeatureRow> x,
                       std::span<const int> y, MlpModel* grad) {
  const int h = m.hidden;
  const double inv_n = 1.0 / static_cast<double>(x.size());
  std::vector<double> pre(h), act(h);
  double loss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double z = m.b2;
    for (int k = 0; k < h; ++k) {
      double s = m.b1[k];
      const double* w = &m.w1[static_cast<size_t>(k) * kFeatureDim];
      for (int j = 0; j < kFeatureDim; ++j) s += w[j] * x[i][j];
      pre[k] = s;
      act[k] = s > 0.0 ? s : 0.0;
      z += m.w2[k] * act[k];
    }
    loss += Softplus(z) - y[i] * z;
    if (grad == nullptr) continue;
    const double dz = (Sigmoid(z) - y[i]) * inv_n;
    grad->b2 += dz;
    for (int k = 0; k < h; ++k) {
      grad->w2[k] += dz * act[k];
      if (pre[k] <= 0.0) continue;
      const double dh = dz * m.w2[k];
      grad->b1[k] += dh;
      double* gw = &grad->w1[static_cast<size_t>(k) * kFeatureDim];
      for (int j = 0; j < kFeatureDim; ++j) gw[j] += dh * x[i][j];
    }
  }
  return loss * inv_n;
}

}  // namespace

double MlpModel::Logit(const FeatureRow& x) const {
  double z = b2;
  for (int k = 0; k < hidden; ++k) {
    double s = b1[k];
    const double* w = &w1[static_cast<size_t>(k) * kFeatureDim];
    for (int j = 0; j < kFeatureDim; ++j) s += w[j] * x[j];
    if (s > 0.0) z += w2[k] * s;
  }
  return z;
}

double MlpModel::Predict(const FeatureRow& x) const { return Sigmoid(Logit(x)); }

std::vector<double> MlpModel::Flatten() const {
  std::vector<double> flat;
  flat.reserve(w1.size() + b1.size() + w2.size() + 1);
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.push_back(b2);
  return flat;
}

MlpModel MlpModel::Unflatten(int hidden, std::span<const double> flat) {
  MlpModel m;
  m.hidden = hidden;
  const size_t n1 = static_cast<size_t>(hidden) * kFeatureDim;
  auto it = flat.begin();
  m.w1.assign(it, it + n1);
  it += n1;
  m.b1.assign(it, it + hidden);
  it += hidden;
  m.w2.assign(it, it + hidden);
  it += hidden;
  m.b2 = *it;
  return m;
}

double MlpObjective(const MlpModel& model, std::span<const FeatureRow> x,
                    std::span<const int> y) {
  return ForwardBackward(model, x, y, nullptr);
}

MlpModel MlpGradient(const MlpModel& model, std::span<const FeatureRow> x,
                     std::span<const int> y) {
  MlpModel g = ZerosLike(model);
  ForwardBackward(model, x, y, &g);
  return g;
}

MlpModel InitMlp(int hidden_units, uint64_t seed) {
  std::mt19937_64 rng(seed);
  MlpModel m;
  m.hidden = hidden_units;
  const double limit1 = std::sqrt(6.0 / (kFeatureDim + hidden_units));
  const double limit2 = std::sqrt(6.0 / (hidden_units + 1));
  std::uniform_real_distribution<double> u1(-limit1, limit1);
  std::uniform_real_distribution<double> u2(-limit2, limit2);
  m.w1.resize(static_cast<size_t>(hidden_units) * kFeatureDim);
  for (double& w : m.w1) w = u1(rng);
  m.b1.assign(hidden_units, 0.0);
  m.w2.resize(hidden_units);
  for (double& w : m.w2) w = u2(rng);
  m.b2 = 0.0;
  return m;
}

absl::StatusOr<MlpModel> FitMlp(std::span<const FeatureRow> x,
                                std::span<const int> y,
                                const MlpOptions& options, uint64_t seed) {
  absl::Status valid = internal::ValidateTrainingData(x, y);
  if (!valid.ok()) return valid;
  if (options.hidden_units < 1) {
    return absl::InvalidArgumentError("MLP needs at least one hidden unit");
  }
  MlpModel model = InitMlp(options.hidden_units, seed);
  const double lr = options.learning_rate;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    MlpModel g = ZerosLike(model);
    const double loss = ForwardBackward(model, x, y, &g);
    if (!std::isfinite(loss)) {
      return absl::InternalError(
          absl::StrCat("MLP loss became non-finite at epoch ", epoch));
    }
    for (size_t i = 0; i < model.w1.size(); ++i) model.w1[i] -= lr * g.w1[i];
    for (int k = 0; k < model.hidden; ++k) {
      model.b1[k] -= lr * g.b1[k];
      model.w2[k] -= lr * g.w2[k];
    }
    model.b2 -= lr * g.b2;
  }
  return model;
}

}  // namespace vidaudit
