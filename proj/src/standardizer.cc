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

#include "vidaudit/classifiers.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace vidaudit {

absl::StatusOr<Standardizer> Standardizer::Fit(
    std::span<const FeatureRow> rows) {
  if (rows.size() < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "standardizer needs at least 2 rows, got ", rows.size()));
  }
  Standardizer s;
  const double n = static_cast<double>(rows.size());
  for (int j = 0; j < kFeatureDim; ++j) {
    double mean = 0.0;
    for (const FeatureRow& r : rows) mean += r[j];
    mean /= n;
    double var = 0.0;
    for (const FeatureRow& r : rows) var += (r[j] - mean) * (r[j] - mean);
    var /= n;
    s.means_[j] = mean;
    const double sd = std::sqrt(var);
    s.degenerate_[j] = !(sd > 0.0);
    s.stds_[j] = s.degenerate_[j] ? 1.0 : sd;
  }
  s.fitted_ = true;
  return s;
}

absl::StatusOr<FeatureRow> Standardizer::Apply(const FeatureRow& row) const {
  if (!fitted_) {
    return absl::FailedPreconditionError("standardizer applied before fit");
  }
  FeatureRow out;
  for (int j = 0; j < kFeatureDim; ++j) {
    out[j] = (row[j] - means_[j]) / stds_[j];
  }
  return out;
}

absl::StatusOr<std::vector<FeatureRow>> Standardizer::Apply(
    std::span<const FeatureRow> rows) const {
  if (!fitted_) {
    return absl::FailedPreconditionError("standardizer applied before fit");
  }
  std::vector<FeatureRow> out;
  out.reserve(rows.size());
  for (const FeatureRow& r : rows) out.push_back(*Apply(r));
  return out;
}

nlohmann::json Standardizer::ToJson() const {
  return nlohmann::json{{"means", means_},
                        {"stds", stds_},
                        {"degenerate", degenerate_},
                        {"fitted", fitted_}};
}

absl::StatusOr<Standardizer> Standardizer::FromJson(const nlohmann::json& j) {
  try {
    Standardizer s;
    s.means_ = j.at("means").get<FeatureRow>();
    s.stds_ = j.at("stds").get<FeatureRow>();
    s.degenerate_ = j.at("degenerate").get<std::array<bool, kFeatureDim>>();
    s.fitted_ = j.at("fitted").get<bool>();
    for (double sd : s.stds_) {
      if (s.fitted_ && !(sd > 0.0)) {
        return absl::InvalidArgumentError("standardizer std must be > 0");
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad standardizer JSON: ", e.what()));
  }
}

}  // namespace vidaudit
