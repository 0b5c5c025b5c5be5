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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "vidaudit/embedding.h"
#include "vidaudit/evaluation.h"
#include "vidaudit/feature_io.h"
#include "vidaudit/features.h"
#include "vidaudit/synthetic_oracle.h"

namespace py = pybind11;

namespace vidaudit {
namespace {

template <typename T>
T Unwrap(absl::StatusOr<T> v) {
  if (!v.ok()) throw std::invalid_argument(std::string(v.status().message()));
  return *std::move(v);
}

std::optional<Membership> LabelFromPy(const std::optional<int>& bit) {
  if (!bit) return std::nullopt;
  return Unwrap(MembershipFromBit(*bit));
}

py::dict FeatureDict(const FeatureVector& f) {
  py::dict d;
  d["id"] = f.sample_id;
  d["sim_low"] = f.sim_low;
  d["temp_diff"] = f.temp_diff;
  d["complexity"] = f.complexity;
  d["duration_log"] = f.duration_log;
  d["complex_temp"] = f.complex_temp;
  d["duration_temp"] = f.duration_temp;
  if (f.label) {
    d["label"] = ToBit(*f.label);
  } else {
    d["label"] = py::none();
  }
  return d;
}

OracleConfig OracleFromArgs(int n_members, int n_nonmembers, double boost,
                            double shift, double noise_sd, uint64_t seed) {
  OracleConfig cfg;
  cfg.n_members = n_members;
  cfg.n_nonmembers = n_nonmembers;
  cfg.member_drift_boost = boost;
  cfg.sim_low_member_shift = shift;
  cfg.noise_sd = noise_sd;
  cfg.seed = seed;
  return cfg;
}

}  // namespace
}  // namespace vidaudit

PYBIND11_MODULE(_core, m) {
  using namespace vidaudit;
  m.doc() = "Native core of the vidaudit membership auditing toolkit.";

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return Unwrap(Auc(scores, labels));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "accuracy",
      [](const std::vector<double>& scores, const std::vector<int>& labels,
         double threshold) {
        return Unwrap(Accuracy(scores, labels, threshold));
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
  m.def(
      "cosine",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return Unwrap(CosineSimilarity(a, b));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "build_feature_vector",
      [](const std::string& id, double sim_low, double sim_high, double flow,
         double duration, std::optional<int> label) {
        DifficultyDescriptors d{flow, duration};
        return FeatureDict(Unwrap(
            BuildFeatureVector(id, sim_low, sim_high, d, LabelFromPy(label))));
      },
      py::arg("sample_id"), py::arg("sim_low"), py::arg("sim_high"),
      py::arg("mean_flow_magnitude"), py::arg("duration_seconds"),
      py::arg("label") = py::none());
  m.def(
      "hashing_embed",
      [](const std::string& text, int dim, bool normalize) {
        return Unwrap(HashingEmbedder(dim, normalize).Embed(text)).values;
      },
      py::arg("text"), py::arg("dim") = 256, py::arg("normalize") = true);
  m.def("analytic_drift_auc", &AnalyticDriftAuc, py::arg("boost"),
        py::arg("noise_sd"));
  m.def(
      "calibrate_effect",
      [](double target_auc, double noise_sd) {
        OracleConfig tmpl;
        tmpl.noise_sd = noise_sd;
        return Unwrap(CalibrateEffect(target_auc, tmpl)).member_drift_boost;
      },
      py::arg("target_auc"), py::arg("noise_sd") = 0.1);
  m.def(
      "generate_features",
      [](int n_members, int n_nonmembers, double boost, double shift,
         double noise_sd, uint64_t seed) {
        OracleDataset d = Unwrap(GenerateFeatures(OracleFromArgs(
            n_members, n_nonmembers, boost, shift, noise_sd, seed)));
        py::list rows;
        for (const FeatureVector& f : d.features) rows.append(FeatureDict(f));
        return rows;
      },
      py::arg("n_members") = 350, py::arg("n_nonmembers") = 350,
      py::arg("boost") = 0.0, py::arg("shift") = 0.0,
      py::arg("noise_sd") = 0.1, py::arg("seed") = 0);
  m.def(
      "generate_features_csv",
      [](int n_members, int n_nonmembers, double boost, uint64_t seed) {
        OracleDataset d = Unwrap(GenerateFeatures(
            OracleFromArgs(n_members, n_nonmembers, boost, 0.0, 0.1, seed)));
        return FeatureCsv(d.features);
      },
      py::arg("n_members") = 350, py::arg("n_nonmembers") = 350,
      py::arg("boost") = 0.0, py::arg("seed") = 0);
  m.def(
      "run_protocol",
      [](const std::string& feature_csv, const std::vector<std::string>& names,
         const std::vector<uint64_t>& seeds, double train_fraction,
         bool stratified, int workers) {
        std::vector<FeatureVector> features =
            Unwrap(ParseFeatureCsv(feature_csv));
        ProtocolOptions opt;
        if (!names.empty()) {
          opt.classifiers.clear();
          for (const std::string& n : names) {
            opt.classifiers.push_back(Unwrap(ParseClassifierKind(n)));
          }
        }
        if (!seeds.empty()) opt.seeds = seeds;
        opt.train_fraction = train_fraction;
        opt.stratified = stratified;
        opt.workers = workers;
        EvaluationReport r;
        {
          py::gil_scoped_release release;
          r = Unwrap(RunProtocol(features, opt));
        }
        return r.ToJson().dump();
      },
      py::arg("feature_csv"), py::arg("classifiers") = std::vector<std::string>{},
      py::arg("seeds") = std::vector<uint64_t>{},
      py::arg("train_fraction") = 0.7, py::arg("stratified") = true,
      py::arg("workers") = 1);
}
