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

#ifndef VIDAUDIT_PIPELINE_H_
#define VIDAUDIT_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "vidaudit/embedding.h"
#include "vidaudit/evaluation.h"
#include "vidaudit/features.h"
#include "vidaudit/synthetic_oracle.h"
#include "vidaudit/target_client.h"
#include "vidaudit/video.h"

namespace vidaudit {

// Artifact names inside a run directory.
inline constexpr char kCacheFile[] = "cache.jsonl";
inline constexpr char kQueryFailuresFile[] = "failures.jsonl";
inline constexpr char kQueryProgressFile[] = "query_progress.json";
inline constexpr char kFeaturesFile[] = "features.csv";
inline constexpr char kFeatureFlagsFile[] = "features_flags.jsonl";
inline constexpr char kFeatureExclusionsFile[] = "features_excluded.jsonl";
inline constexpr char kReportFile[] = "report.json";
inline constexpr char kPerSeedFile[] = "per_seed.csv";
inline constexpr char kMatchedManifestFile[] = "matched_manifest.jsonl";
inline constexpr char kMatchSummaryFile[] = "match_summary.json";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitPartial = 2,
  kExitHard = 3,
};

struct MockBackendConfig {
  std::string model_id = "mock-videollm";
  uint64_t seed = 0;
  std::string binding_path;
  MockModelConfig model;
};

struct RunConfig {
  std::string manifest_path;
  std::string output_dir;
  std::string prompt = kDefaultPrompt;
  double tau_low = kDefaultTauLow;
  double tau_high = kDefaultTauHigh;
  int max_tokens = kDefaultMaxTokens;
  // Concurrent samples in query and features.
  int workers = 1;
  // Exactly one of these is set.
  std::optional<MockBackendConfig> mock;
  std::optional<TargetEndpointConfig> remote;
  EmbedderConfig embedder;
  FlowParams flow;
  ProtocolOptions protocol;
  double caliper = 0.1;
  // 0 matches as many pairs as the smaller pool allows.
  int match_n_per_class = 0;
  uint64_t match_seed = 0;

  std::string target_model_id() const;
};

// Relative paths in the document are resolved against `base_dir`. Unknown
// keys are errors.
absl::StatusOr<RunConfig> ParseRunConfig(const std::string& yaml_text,
                                         const std::filesystem::path& base_dir);
absl::StatusOr<RunConfig> LoadRunConfig(const std::filesystem::path& path);
absl::Status ValidateRunConfig(const RunConfig& config);

// ---------------------------------------------------------------------------
// Dataset manifest (JSONL):
//   {"id", "frames_dir" | "descriptors_path", "reference_text",
//    "label": 0 | 1 (optional), "source" (optional)}
// Video paths are relative to the manifest's directory unless absolute.

struct ManifestEntry {
  CandidateSample sample;
  int line = 0;
};

// Validates every line and reports all problems in one error.
absl::StatusOr<std::vector<ManifestEntry>> ParseManifest(
    const std::string& text, const std::filesystem::path& base_dir);
absl::StatusOr<std::vector<ManifestEntry>> ReadManifest(
    const std::filesystem::path& path);
// One manifest line (without the newline) with an absolute video path.
std::string ManifestLine(const CandidateSample& sample);

// {"id", "reference_text", "label"} per line.
absl::StatusOr<std::map<std::string, MockBinding>> ReadMockBindings(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Commands. Each reads only its declared inputs and writes its artifacts
// into the run directory.

struct CommandResult {
  int exit_code = kExitOk;
  std::string message;
  nlohmann::json summary = nlohmann::json::object();
};

// Counts per pool and duration statistics. Writes the summary to
// `summary_path` when non-empty.
CommandResult CmdIngest(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& summary_path = {});

// Length-matched member/non-member subset of the manifest.
CommandResult CmdMatch(const RunConfig& config);

// Fills the generation cache. `target` overrides the configured backend.
CommandResult CmdQuery(const RunConfig& config,
                       TargetModel* target = nullptr);

CommandResult CmdFeatures(const RunConfig& config);

// Reads `features_path`, or the run directory's feature CSV when empty.
CommandResult CmdEvaluate(const RunConfig& config,
                          const std::filesystem::path& features_path = {});

struct SimulateOptions {
  enum class Mode { kFeatures, kCorpus };
  Mode mode = Mode::kFeatures;
  std::filesystem::path output_dir;
  OracleConfig oracle;
  // Calibrates member_drift_boost when set.
  std::optional<double> target_auc;
  MockCorpusConfig corpus;
  // Also evaluate (features mode) or run query, features and evaluate on the
  // corpus (corpus mode).
  bool run = false;
  int seed_count = 100;
  int workers = 1;
};

CommandResult CmdSimulate(const SimulateOptions& options);

}  // namespace vidaudit

#endif  // VIDAUDIT_PIPELINE_H_
