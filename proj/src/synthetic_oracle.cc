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

#include "vidaudit/synthetic_oracle.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "vidaudit/feature_io.h"
#include "vidaudit/hashing.h"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

using json = nlohmann::json;

constexpr int kTextureSize = 256;

constexpr const char* kReferenceWords[] = {
    "person",  "walks",    "across",  "street",   "camera",  "slowly",
    "pans",    "toward",   "building", "red",     "car",     "parked",
    "near",    "tree",     "woman",   "holding",  "umbrella", "rain",
    "falls",   "children", "play",    "park",     "dog",     "runs",
    "after",   "ball",     "sunset",  "over",     "ocean",   "waves",
    "crash",   "rocks",    "man",     "cooks",    "kitchen", "vegetables",
    "chopped", "board",    "crowd",   "cheers",   "stadium", "players",
    "kick",    "goal",     "bird",    "lands",    "branch",  "wind",
    "blows",   "leaves",   "train",   "arrives",  "station", "passengers",
    "platform",   "city",     "lights",  "night",    "traffic", "moves"};

bool IsFiniteNonNegative(double v) { return std::isfinite(v) && v >= 0.0; }

double Clip(double v, bool* clipped) {
  if (v > 1.0 || v < -1.0) {
    *clipped = true;
    return std::clamp(v, -1.0, 1.0);
  }
  return v;
}

std::string ReferenceText(std::mt19937_64& rng, int min_words, int max_words) {
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<size_t> pick(0, std::size(kReferenceWords) - 1);
  const int n = len(rng);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += kReferenceWords[pick(rng)];
  }
  return out;
}

absl::Status EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(absl::StrCat(
        "cannot create directory ", dir.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateOracleConfig(const OracleConfig& cfg) {
  if (cfg.n_members < 1 || cfg.n_nonmembers < 1) {
    return absl::InvalidArgumentError("oracle needs at least one sample per class");
  }
  if (!IsFiniteNonNegative(cfg.member_drift_boost)) {
    return absl::InvalidArgumentError("member_drift_boost must be finite and >= 0");
  }
  if (!(cfg.noise_sd > 0.0) || !std::isfinite(cfg.noise_sd)) {
    return absl::InvalidArgumentError("noise_sd must be finite and > 0");
  }
  for (double v : {cfg.similarity_noise_sd, cfg.log_duration_sd,
                   cfg.log_flow_sd}) {
    if (!IsFiniteNonNegative(v)) {
      return absl::InvalidArgumentError(
          "spread parameters must be finite and >= 0");
    }
  }
  for (double v : {cfg.sim_low_member_shift, cfg.base_similarity,
                   cfg.complexity_coupling, cfg.duration_coupling,
                   cfg.base_drift, cfg.log_duration_mean, cfg.log_flow_mean}) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("oracle parameters must be finite");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<OracleDataset> GenerateFeatures(const OracleConfig& cfg) {
  RETURN_IF_ERROR(ValidateOracleConfig(cfg));
  std::mt19937_64 rng(MixSeed(cfg.seed, 0x4f5241434c45ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  OracleDataset out;
  const int n = cfg.n_members + cfg.n_nonmembers;
  out.features.reserve(n);
  int clipped_draws = 0;
  for (int i = 0; i < n; ++i) {
    const bool member = i < cfg.n_members;
    const double m = member ? 1.0 : 0.0;
    // Fixed draw order keeps datasets stable across parameter changes.
    const double z_duration = normal(rng);
    const double z_flow = normal(rng);
    const double e_sim = normal(rng);
    const double e_drift = normal(rng);
    DifficultyDescriptors desc;
    desc.duration_seconds =
        std::exp(cfg.log_duration_mean + cfg.log_duration_sd * z_duration);
    desc.mean_flow_magnitude =
        std::exp(cfg.log_flow_mean + cfg.log_flow_sd * z_flow);
    bool clipped_high = false, clipped_low = false;
    const double sim_high =
        Clip(cfg.base_similarity + cfg.sim_low_member_shift * m -
                 cfg.complexity_coupling * std::log1p(desc.mean_flow_magnitude) -
                 cfg.duration_coupling * std::log1p(desc.duration_seconds) +
                 cfg.similarity_noise_sd * e_sim,
             &clipped_high);
    const double sim_low =
        Clip(sim_high + cfg.base_drift + cfg.member_drift_boost * m +
                 cfg.noise_sd * e_drift,
             &clipped_low);
    clipped_draws += (clipped_high ? 1 : 0) + (clipped_low ? 1 : 0);
    ASSIGN_OR_RETURN(
        FeatureVector f,
        BuildFeatureVector(absl::StrFormat("syn_%05d", i), sim_low, sim_high,
                           desc,
                           member ? Membership::kMember
                                  : Membership::kNonMember));
    out.features.push_back(std::move(f));
  }
  out.clip_rate = static_cast<double>(clipped_draws) / (2.0 * n);
  return out;
}

double AnalyticDriftAuc(double boost, double noise_sd) {
  // Phi(z) = erfc(-z / sqrt(2)) / 2 with z = boost / (sqrt(2) noise_sd).
  return 0.5 * std::erfc(-boost / (2.0 * noise_sd));
}

absl::StatusOr<OracleConfig> CalibrateEffect(double target_auc,
                                             const OracleConfig& tmpl,
                                             double max_boost) {
  RETURN_IF_ERROR(ValidateOracleConfig(tmpl));
  if (!(target_auc >= 0.5 && target_auc < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("target AUC must be in [0.5, 1), got ", target_auc));
  }
  if (!(max_boost > 0.0) || !std::isfinite(max_boost)) {
    return absl::InvalidArgumentError("max_boost must be finite and > 0");
  }
  OracleConfig cfg = tmpl;
  if (AnalyticDriftAuc(max_boost, tmpl.noise_sd) < target_auc - 1e-3) {
    return absl::OutOfRangeError(absl::StrCat(
        "target AUC ", target_auc, " needs a drift boost above ", max_boost,
        " at noise_sd ", tmpl.noise_sd));
  }
  double lo = 0.0, hi = max_boost;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (AnalyticDriftAuc(mid, tmpl.noise_sd) < target_auc ? lo : hi) = mid;
  }
  cfg.member_drift_boost = 0.5 * (lo + hi);
  return cfg;
}

absl::Status ValidateMockCorpusConfig(const MockCorpusConfig& cfg) {
  if (cfg.n_members < 1 || cfg.n_nonmembers < 1) {
    return absl::InvalidArgumentError("corpus needs at least one sample per class");
  }
  if (cfg.width < 16 || cfg.height < 16) {
    return absl::InvalidArgumentError("frames must be at least 16x16");
  }
  if (cfg.min_frames < 2 || cfg.max_frames < cfg.min_frames) {
    return absl::InvalidArgumentError("need 2 <= min_frames <= max_frames");
  }
  if (!(cfg.fps > 0.0) || !std::isfinite(cfg.fps)) {
    return absl::InvalidArgumentError("fps must be finite and > 0");
  }
  if (cfg.max_velocity < 0) {
    return absl::InvalidArgumentError("max_velocity must be >= 0");
  }
  if (cfg.min_words < 1 || cfg.max_words < cfg.min_words) {
    return absl::InvalidArgumentError("need 1 <= min_words <= max_words");
  }
  return absl::OkStatus();
}

std::vector<GrayImage> RenderTranslatingFrames(int width, int height,
                                               int n_frames, int vx, int vy,
                                               uint64_t texture_seed) {
  std::mt19937_64 rng(texture_seed);
  std::vector<uint8_t> texture(kTextureSize * kTextureSize);
  for (uint8_t& t : texture) t = static_cast<uint8_t>(rng() & 0xff);
  auto wrap = [](int v) {
    return ((v % kTextureSize) + kTextureSize) % kTextureSize;
  };
  std::vector<GrayImage> frames;
  frames.reserve(n_frames);
  for (int t = 0; t < n_frames; ++t) {
    GrayImage img(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        img.at(x, y) =
            texture[wrap(y - vy * t) * kTextureSize + wrap(x - vx * t)];
      }
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

absl::StatusOr<MockCorpus> GenerateMockCorpus(
    const MockCorpusConfig& cfg, const std::filesystem::path& dir) {
  RETURN_IF_ERROR(ValidateMockCorpusConfig(cfg));
  RETURN_IF_ERROR(EnsureDirectory(dir));
  std::mt19937_64 rng(MixSeed(cfg.seed, 0x434f52505553ULL));
  std::uniform_int_distribution<int> velocity(-cfg.max_velocity,
                                              cfg.max_velocity);
  std::uniform_int_distribution<int> frame_count(cfg.min_frames,
                                                 cfg.max_frames);
  MockCorpus corpus;
  corpus.manifest_path = dir / "manifest.jsonl";
  corpus.binding_path = dir / "mock_binding.jsonl";
  std::string manifest, bindings;
  const int n = cfg.n_members + cfg.n_nonmembers;
  for (int i = 0; i < n; ++i) {
    MockCorpusSample s;
    const Membership membership =
        i < cfg.n_members ? Membership::kMember : Membership::kNonMember;
    s.sample.id = absl::StrFormat("mock_%04d", i);
    s.vx = velocity(rng);
    s.vy = velocity(rng);
    s.n_frames = frame_count(rng);
    s.sample.reference_text = ReferenceText(rng, cfg.min_words, cfg.max_words);
    s.sample.label = membership;
    s.sample.source_tag = "synthetic";
    const uint64_t texture_seed = rng();

    const std::string rel = absl::StrCat("frames/", s.sample.id);
    const std::filesystem::path frame_dir = dir / rel;
    RETURN_IF_ERROR(EnsureDirectory(frame_dir));
    const std::vector<GrayImage> frames = RenderTranslatingFrames(
        cfg.width, cfg.height, s.n_frames, s.vx, s.vy, texture_seed);
    for (size_t t = 0; t < frames.size(); ++t) {
      RETURN_IF_ERROR(WritePgm(
          frame_dir / absl::StrFormat("frame_%04d.pgm", t), frames[t]));
    }
    RETURN_IF_ERROR(WriteFile(frame_dir / "meta.json",
                              json{{"fps", cfg.fps}}.dump() + "\n"));
    s.sample.video = VideoRef{VideoRef::Kind::kFrameDirectory,
                              frame_dir.lexically_normal().string()};

    absl::StrAppend(&manifest,
                    json{{"id", s.sample.id},
                         {"frames_dir", rel},
                         {"reference_text", s.sample.reference_text},
                         {"label", ToBit(membership)},
                         {"source", s.sample.source_tag}}
                        .dump(),
                    "\n");
    absl::StrAppend(&bindings,
                    json{{"id", s.sample.id},
                         {"reference_text", s.sample.reference_text},
                         {"label", ToBit(membership)}}
                        .dump(),
                    "\n");
    corpus.bindings[s.sample.id] =
        MockBinding{s.sample.reference_text, membership};
    corpus.samples.push_back(std::move(s));
  }
  RETURN_IF_ERROR(WriteFile(corpus.manifest_path, manifest));
  RETURN_IF_ERROR(WriteFile(corpus.binding_path, bindings));
  return corpus;
}

}  // namespace vidaudit
