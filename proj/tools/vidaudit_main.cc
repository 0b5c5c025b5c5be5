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

// Command-line driver: one subcommand per pipeline stage.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vidaudit/pipeline.h"

namespace {

using vidaudit::CommandResult;
using vidaudit::RunConfig;

int Report(const CommandResult& r) {
  if (!r.message.empty()) {
    (r.exit_code == vidaudit::kExitOk ? std::cout : std::cerr)
        << r.message << "\n";
  }
  return r.exit_code;
}

// Loads the config, applying the --workers override when given.
std::optional<RunConfig> Load(const std::string& path, int workers) {
  absl::StatusOr<RunConfig> cfg = vidaudit::LoadRunConfig(path);
  if (!cfg.ok()) {
    std::cerr << "config error: " << cfg.status().message() << "\n";
    return std::nullopt;
  }
  if (workers > 0) {
    cfg->workers = workers;
    cfg->protocol.workers = workers;
  }
  return *cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temperature-drift membership auditing for video captioners"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = 0;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run config (YAML)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-w,--workers", workers, "Override worker count")
        ->check(CLI::PositiveNumber);
  };

  std::string manifest_path, summary_path;
  CLI::App* ingest = app.add_subcommand("ingest", "Validate a manifest");
  ingest->add_option("-m,--manifest", manifest_path, "Dataset manifest")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("-o,--out", summary_path, "Write the summary JSON here");

  CLI::App* match =
      app.add_subcommand("match", "Length-matched member/non-member subset");
  add_config(match);

  CLI::App* query = app.add_subcommand("query", "Populate the generation cache");
  add_config(query);

  CLI::App* features =
      app.add_subcommand("features", "Build the feature CSV from the cache");
  add_config(features);

  std::string features_override;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Run the repeated-split protocol");
  add_config(evaluate);
  evaluate->add_option("--features", features_override,
                       "Feature CSV (default: <output_dir>/features.csv)");

  vidaudit::SimulateOptions sim;
  std::string sim_mode = "features";
  std::string sim_out;
  double target_auc = -1.0;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Generate synthetic data, optionally run");
  simulate->add_option("--mode", sim_mode, "features | corpus")
      ->check(CLI::IsMember({"features", "corpus"}));
  simulate->add_option("-o,--out", sim_out, "Output directory")->required();
  simulate->add_option("--members", sim.oracle.n_members, "Member count");
  simulate->add_option("--nonmembers", sim.oracle.n_nonmembers,
                       "Non-member count");
  simulate->add_option("--boost", sim.oracle.member_drift_boost,
                       "Member drift boost");
  simulate->add_option("--shift", sim.oracle.sim_low_member_shift,
                       "Member similarity shift");
  simulate->add_option("--noise-sd", sim.oracle.noise_sd, "Drift noise sd");
  simulate->add_option("--target-auc", target_auc,
                       "Calibrate the boost to this single-feature AUC");
  simulate->add_option("--seed", sim.oracle.seed, "Generator seed");
  simulate->add_option("--corpus-members", sim.corpus.n_members,
                       "Corpus member count");
  simulate->add_option("--corpus-nonmembers", sim.corpus.n_nonmembers,
                       "Corpus non-member count");
  simulate->add_option("--max-velocity", sim.corpus.max_velocity,
                       "Largest per-axis velocity in pixels/frame");
  simulate->add_flag("--run", sim.run, "Also run the downstream stages");
  simulate->add_option("--seeds", sim.seed_count, "Evaluation seed count");
  simulate->add_option("-w,--workers", sim.workers, "Worker count")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? vidaudit::kExitOk : vidaudit::kExitUsage;
  }

  if (*ingest) return Report(vidaudit::CmdIngest(manifest_path, summary_path));
  if (*simulate) {
    sim.mode = sim_mode == "corpus" ? vidaudit::SimulateOptions::Mode::kCorpus
                                    : vidaudit::SimulateOptions::Mode::kFeatures;
    sim.output_dir = sim_out;
    sim.corpus.seed = sim.oracle.seed;
    if (target_auc >= 0.0) sim.target_auc = target_auc;
    return Report(vidaudit::CmdSimulate(sim));
  }
  std::optional<RunConfig> cfg = Load(config_path, workers);
  if (!cfg) return vidaudit::kExitUsage;
  if (*match) return Report(vidaudit::CmdMatch(*cfg));
  if (*query) return Report(vidaudit::CmdQuery(*cfg));
  if (*features) return Report(vidaudit::CmdFeatures(*cfg));
  return Report(vidaudit::CmdEvaluate(*cfg, features_override));
}
