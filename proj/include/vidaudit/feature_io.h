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

#ifndef VIDAUDIT_FEATURE_IO_H_
#define VIDAUDIT_FEATURE_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "vidaudit/features.h"

namespace vidaudit {

inline constexpr char kFeatureCsvHeader[] =
    "id,label,sim_low,temp_diff,complexity,duration_log,complex_temp,"
    "duration_temp";

// Canonical CSV: the header above, one row per vector, labels as 0/1 or
// empty, reals printed with 17 significant digits so they read back exactly.
std::string FeatureCsv(std::span<const FeatureVector> features);

absl::StatusOr<std::vector<FeatureVector>> ParseFeatureCsv(
    const std::string& text);
absl::StatusOr<std::vector<FeatureVector>> ReadFeatureCsv(
    const std::filesystem::path& path);

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
absl::Status WriteFile(const std::filesystem::path& path,
                       const std::string& contents);

std::string FormatReal(double v);

}  // namespace vidaudit

#endif  // VIDAUDIT_FEATURE_IO_H_
