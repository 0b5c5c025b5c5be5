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

#ifndef VIDAUDIT_SYNTHETIC_ORACLE_H_
#define VIDAUDIT_SYNTHETIC_ORACLE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "vidaudit/features.h"
#include "vidaudit/target_client.h"
#include "vidaudit/video.h"

namespace vidaudit {

// Parametric generator of labeled feature vectors.
//
//   duration ~ LogNormal(log_duration_mean, log_duration_sd)
//   flow     ~ LogNormal(log_flow_mean, log_flow_sd)
//   sim_high = clip(base_similarity + shift * m
//                   - complexity_coupling * log1p(flow)
//                   - duration_coupling * log1p(duration)
//                   + similarity_noise_sd * e1)
//   sim_low  = clip(sim_high + base_drift + member_drift_boost * m
//                   + noise_sd * e2)
//
// with m = 1 for members and e1, e2 standard normal. The member shift moves
// both similarities together, so temp_diff carries only the drift boost.
struct OracleConfig {
  int n_members = 350;
  int n_nonmembers = 350;
  double member_drift_boost = 0.0;
  double sim_low_member_shift = 0.0;
  double base_similarity = 0.5;
  double complexity_coupling = 0.03;
  double duration_coupling = 0.02;
  double similarity_noise_sd = 0.05;
  double base_drift = 0.02;
  double noise_sd = 0.1;
  double log_duration_mean = 3.4011973816621555;  // log(30)
  double log_duration_sd = 0.6;
  double log_flow_mean = 1.0986122886681098;  // log(3)
  double log_flow_sd = 0.5;
  uint64_t seed = 0;
};

absl::Status ValidateOracleConfig(const OracleConfig& cfg);

struct OracleDataset {
  std::vector<FeatureVector> features;  // members first, ids "syn_00000"...
  // Fraction of similarity draws that hit the [-1, 1] clip.
  double clip_rate = 0.0;
};

absl::StatusOr<OracleDataset> GenerateFeatures(const OracleConfig& cfg);

// Single-feature AUC of temp_diff before clipping:
// Phi(boost / (sqrt(2) * noise_sd)).
double AnalyticDriftAuc(double boost, double noise_sd);

// Returns `tmpl` with member_drift_boost set so that AnalyticDriftAuc hits
// target_auc within 1e-3. OutOfRange when the target needs more than
// max_boost.
absl::StatusOr<OracleConfig> CalibrateEffect(double target_auc,
                                             const OracleConfig& tmpl,
                                             double max_boost = 2.0);

// ---------------------------------------------------------------------------
// Mock corpus for end-to-end runs without network access.

struct MockCorpusConfig {
  int n_members = 10;
  int n_nonmembers = 10;
  int width = 96;
  int height = 96;
  int min_frames = 4;
  int max_frames = 10;
  double fps = 4.0;
  // Per-sample velocity components are drawn from [-max_velocity,
  // max_velocity].
  int max_velocity = 4;
  int min_words = 20;
  int max_words = 40;
  uint64_t seed = 0;
};

absl::Status ValidateMockCorpusConfig(const MockCorpusConfig& cfg);

struct MockCorpusSample {
  CandidateSample sample;
  int vx = 0;
  int vy = 0;
  int n_frames = 0;
};

struct MockCorpus {
  std::vector<MockCorpusSample> samples;
  std::map<std::string, MockBinding> bindings;
  std::filesystem::path manifest_path;
  std::filesystem::path binding_path;
};

// Frames of a seeded random texture translating by (vx, vy) pixels per frame.
std::vector<GrayImage> RenderTranslatingFrames(int width, int height,
                                               int n_frames, int vx, int vy,
                                               uint64_t texture_seed);

// Writes <dir>/frames/<id>/frame_NNNN.pgm + meta.json per sample,
// <dir>/manifest.jsonl (frames_dir relative to <dir>) and
// <dir>/mock_binding.jsonl ({"id", "reference_text", "label"}).
absl::StatusOr<MockCorpus> GenerateMockCorpus(
    const MockCorpusConfig& cfg, const std::filesystem::path& dir);

}  // namespace vidaudit

#endif  // VIDAUDIT_SYNTHETIC_ORACLE_H_
