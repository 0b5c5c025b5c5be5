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

#include "vidaudit/feature_io.h"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

absl::StatusOr<double> ParseReal(const std::string& field, int line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || errno != 0 ||
      !std::isfinite(v)) {
    return absl::InvalidArgumentError(
        absl::StrCat("line ", line_no, ": bad number '", field, "'"));
  }
  return v;
}

}  // namespace

std::string FormatReal(double v) { return absl::StrFormat("%.17g", v); }

std::string FeatureCsv(std::span<const FeatureVector> features) {
  std::string out = absl::StrCat(kFeatureCsvHeader, "\n");
  for (const FeatureVector& f : features) {
    absl::StrAppend(&out, f.sample_id, ",",
                    f.label ? absl::StrCat(ToBit(*f.label)) : "", ",",
                    FormatReal(f.sim_low), ",", FormatReal(f.temp_diff), ",",
                    FormatReal(f.complexity), ",", FormatReal(f.duration_log),
                    ",", FormatReal(f.complex_temp), ",",
                    FormatReal(f.duration_temp), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<FeatureVector>> ParseFeatureCsv(
    const std::string& text) {
  std::vector<FeatureVector> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kFeatureCsvHeader) {
        return absl::InvalidArgumentError(
            absl::StrCat("unexpected feature CSV header: '", line, "'"));
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields = absl::StrSplit(line, ',');
    if (fields.size() != 8) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": expected 8 fields, got ", fields.size()));
    }
    FeatureVector f;
    f.sample_id = fields[0];
    if (f.sample_id.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": empty id"));
    }
    if (fields[1] == "0" || fields[1] == "1") {
      f.label = fields[1] == "1" ? Membership::kMember : Membership::kNonMember;
    } else if (!fields[1].empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": label must be 0, 1 or empty"));
    }
    double* slots[] = {&f.sim_low,      &f.temp_diff,    &f.complexity,
                       &f.duration_log, &f.complex_temp, &f.duration_temp};
    for (int k = 0; k < 6; ++k) {
      ASSIGN_OR_RETURN(*slots[k], ParseReal(fields[2 + k], line_no));
    }
    out.push_back(std::move(f));
  }
  if (line_no == 0) return absl::InvalidArgumentError("feature CSV is empty");
  return out;
}

absl::StatusOr<std::vector<FeatureVector>> ReadFeatureCsv(
    const std::filesystem::path& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  absl::StatusOr<std::vector<FeatureVector>> parsed = ParseFeatureCsv(text);
  if (!parsed.ok()) {
    return absl::Status(parsed.status().code(),
                        absl::StrCat(path.string(), ": ",
                                     parsed.status().message()));
  }
  return parsed;
}

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

absl::Status WriteFile(const std::filesystem::path& path,
                       const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::PermissionDeniedError(
          absl::StrCat("cannot write ", tmp.string()));
    }
    out << contents;
    if (!out) return absl::DataLossError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    return absl::InternalError(absl::StrCat("rename to ", path.string(),
                                            " failed: ", ec.message()));
  }
  return absl::OkStatus();
}

}  // namespace vidaudit
