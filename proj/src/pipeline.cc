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

#include "vidaudit/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "vidaudit/feature_io.h"
#include "vidaudit/status_macros.h"
#include "yaml-cpp/yaml.h"

namespace vidaudit {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing helpers.

std::string Resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal().string();
}

absl::Status CheckKeys(const YAML::Node& node, const std::string& where,
                       const std::set<std::string>& allowed) {
  if (!node.IsMap()) {
    return absl::InvalidArgumentError(absl::StrCat(where, " must be a mapping"));
  }
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key '", key, "' in ", where));
    }
  }
  return absl::OkStatus();
}

template <typename T>
void Read(const YAML::Node& node, const char* key, T* out) {
  if (node[key]) *out = node[key].as<T>();
}

absl::StatusOr<std::vector<uint64_t>> ParseSeeds(const YAML::Node& node) {
  std::vector<uint64_t> seeds;
  if (node.IsSequence()) {
    for (const auto& s : node) seeds.push_back(s.as<uint64_t>());
  } else {
    RETURN_IF_ERROR(CheckKeys(node, "evaluation.seeds", {"start", "count"}));
    uint64_t start = 0;
    int count = 100;
    Read(node, "start", &start);
    Read(node, "count", &count);
    if (count < 1) {
      return absl::InvalidArgumentError("evaluation.seeds.count must be >= 1");
    }
    for (int i = 0; i < count; ++i) seeds.push_back(start + i);
  }
  if (seeds.empty()) {
    return absl::InvalidArgumentError("evaluation.seeds is empty");
  }
  return seeds;
}

absl::Status ParseTarget(const YAML::Node& node, const fs::path& base,
                         RunConfig* cfg) {
  RETURN_IF_ERROR(CheckKeys(node, "target", {"mock", "remote"}));
  if (static_cast<bool>(node["mock"]) == static_cast<bool>(node["remote"])) {
    return absl::InvalidArgumentError(
        "target must configure exactly one of 'mock' or 'remote'");
  }
  if (const YAML::Node m = node["mock"]) {
    RETURN_IF_ERROR(CheckKeys(m, "target.mock",
                              {"model_id", "seed", "binding_path",
                               "member_slope", "nonmember_floor",
                               "nonmember_slope"}));
    MockBackendConfig mock;
    Read(m, "model_id", &mock.model_id);
    Read(m, "seed", &mock.seed);
    Read(m, "binding_path", &mock.binding_path);
    Read(m, "member_slope", &mock.model.member_slope);
    Read(m, "nonmember_floor", &mock.model.nonmember_floor);
    Read(m, "nonmember_slope", &mock.model.nonmember_slope);
    mock.binding_path = Resolve(base, mock.binding_path);
    cfg->mock = mock;
  } else {
    const YAML::Node r = node["remote"];
    RETURN_IF_ERROR(CheckKeys(r, "target.remote",
                              {"base_url", "model_id", "auth_token_env",
                               "timeout_seconds", "max_retries",
                               "requests_per_minute",
                               "zero_temperature_fallback"}));
    TargetEndpointConfig remote;
    Read(r, "base_url", &remote.base_url);
    Read(r, "model_id", &remote.model_id);
    Read(r, "auth_token_env", &remote.auth_token_env);
    Read(r, "timeout_seconds", &remote.timeout_seconds);
    Read(r, "max_retries", &remote.max_retries);
    Read(r, "requests_per_minute", &remote.requests_per_minute);
    Read(r, "zero_temperature_fallback", &remote.zero_temperature_fallback);
    cfg->remote = remote;
  }
  return absl::OkStatus();
}

absl::Status ParseEmbedder(const YAML::Node& e, RunConfig* cfg) {
  RETURN_IF_ERROR(CheckKeys(e, "embedder",
                            {"kind", "dim", "normalize", "base_url",
                             "model_id", "auth_token_env", "timeout_seconds",
                             "max_retries", "requests_per_minute",
                             "max_chars"}));
  EmbedderConfig& ec = cfg->embedder;
  std::string kind = "hashing";
  Read(e, "kind", &kind);
  if (kind == "hashing") {
    ec.kind = EmbedderConfig::Kind::kHashing;
  } else if (kind == "remote") {
    ec.kind = EmbedderConfig::Kind::kRemote;
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "embedder.kind must be 'hashing' or 'remote', got '", kind, "'"));
  }
  Read(e, "dim", &ec.dim);
  Read(e, "normalize", &ec.normalize);
  Read(e, "base_url", &ec.base_url);
  Read(e, "model_id", &ec.model_id);
  Read(e, "auth_token_env", &ec.auth_token_env);
  Read(e, "timeout_seconds", &ec.timeout_seconds);
  Read(e, "max_retries", &ec.max_retries);
  Read(e, "requests_per_minute", &ec.requests_per_minute);
  Read(e, "max_chars", &ec.max_chars);
  return absl::OkStatus();
}

absl::Status ParseEvaluation(const YAML::Node& e, RunConfig* cfg) {
  RETURN_IF_ERROR(CheckKeys(
      e, "evaluation",
      {"classifiers", "seeds", "train_fraction", "stratified", "workers",
       "logistic_regression", "svm", "random_forest", "mlp"}));
  ProtocolOptions& p = cfg->protocol;
  if (const YAML::Node c = e["classifiers"]) {
    p.classifiers.clear();
    for (const auto& name : c) {
      ASSIGN_OR_RETURN(ClassifierKind kind,
                       ParseClassifierKind(name.as<std::string>()));
      p.classifiers.push_back(kind);
    }
  }
  if (const YAML::Node s = e["seeds"]) {
    ASSIGN_OR_RETURN(p.seeds, ParseSeeds(s));
  }
  Read(e, "train_fraction", &p.train_fraction);
  Read(e, "stratified", &p.stratified);
  Read(e, "workers", &p.workers);
  ClassifierOptions& o = p.classifier_options;
  if (const YAML::Node n = e["logistic_regression"]) {
    RETURN_IF_ERROR(CheckKeys(n, "evaluation.logistic_regression",
                              {"l2", "learning_rate", "max_iter", "tol"}));
    Read(n, "l2", &o.lr.l2);
    Read(n, "learning_rate", &o.lr.learning_rate);
    Read(n, "max_iter", &o.lr.max_iter);
    Read(n, "tol", &o.lr.tol);
  }
  if (const YAML::Node n = e["svm"]) {
    RETURN_IF_ERROR(CheckKeys(n, "evaluation.svm", {"l2", "epochs"}));
    Read(n, "l2", &o.svm.l2);
    Read(n, "epochs", &o.svm.epochs);
  }
  if (const YAML::Node n = e["random_forest"]) {
    RETURN_IF_ERROR(CheckKeys(n, "evaluation.random_forest",
                              {"n_trees", "max_depth", "min_leaf",
                               "bootstrap", "max_features"}));
    Read(n, "n_trees", &o.rf.n_trees);
    Read(n, "max_depth", &o.rf.max_depth);
    Read(n, "min_leaf", &o.rf.min_leaf);
    Read(n, "bootstrap", &o.rf.bootstrap);
    Read(n, "max_features", &o.rf.max_features);
  }
  if (const YAML::Node n = e["mlp"]) {
    RETURN_IF_ERROR(CheckKeys(n, "evaluation.mlp",
                              {"hidden_units", "learning_rate", "epochs"}));
    Read(n, "hidden_units", &o.mlp.hidden_units);
    Read(n, "learning_rate", &o.mlp.learning_rate);
    Read(n, "epochs", &o.mlp.epochs);
  }
  return absl::OkStatus();
}

absl::Status ParseRoot(const YAML::Node& root, const fs::path& base,
                       RunConfig* cfg) {
  RETURN_IF_ERROR(CheckKeys(
      root, "config",
      {"manifest", "output_dir", "prompt", "tau_low", "tau_high",
       "max_tokens", "workers", "target", "embedder", "flow", "evaluation",
       "matching"}));
  Read(root, "manifest", &cfg->manifest_path);
  Read(root, "output_dir", &cfg->output_dir);
  cfg->manifest_path = Resolve(base, cfg->manifest_path);
  cfg->output_dir = Resolve(base, cfg->output_dir);
  Read(root, "prompt", &cfg->prompt);
  Read(root, "tau_low", &cfg->tau_low);
  Read(root, "tau_high", &cfg->tau_high);
  Read(root, "max_tokens", &cfg->max_tokens);
  Read(root, "workers", &cfg->workers);
  if (!root["target"]) {
    return absl::InvalidArgumentError("config has no 'target' section");
  }
  RETURN_IF_ERROR(ParseTarget(root["target"], base, cfg));
  if (const YAML::Node e = root["embedder"]) {
    RETURN_IF_ERROR(ParseEmbedder(e, cfg));
  }
  if (const YAML::Node f = root["flow"]) {
    RETURN_IF_ERROR(
        CheckKeys(f, "flow", {"block_size", "search_radius", "max_dim"}));
    Read(f, "block_size", &cfg->flow.block_size);
    Read(f, "search_radius", &cfg->flow.search_radius);
    Read(f, "max_dim", &cfg->flow.max_dim);
  }
  if (const YAML::Node e = root["evaluation"]) {
    RETURN_IF_ERROR(ParseEvaluation(e, cfg));
  }
  if (const YAML::Node m = root["matching"]) {
    RETURN_IF_ERROR(
        CheckKeys(m, "matching", {"caliper", "n_per_class", "seed"}));
    Read(m, "caliper", &cfg->caliper);
    Read(m, "n_per_class", &cfg->match_n_per_class);
    Read(m, "seed", &cfg->match_seed);
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// Small utilities.

absl::Status EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(absl::StrCat(
        "cannot create directory ", dir.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

CommandResult Failure(int code, const absl::Status& status) {
  CommandResult r;
  r.exit_code = code;
  r.message = std::string(status.message());
  if (r.message.empty()) r.message = status.ToString();
  return r;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void ParallelFor(size_t n, int workers, Fn fn) {
  std::atomic<size_t> next{0};
  auto body = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  const int threads =
      std::clamp<int>(workers, 1, static_cast<int>(std::max<size_t>(n, 1)));
  if (threads == 1) {
    body();
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(body);
}

std::string JsonLines(const std::vector<json>& rows) {
  std::string out;
  for (const json& j : rows) absl::StrAppend(&out, j.dump(), "\n");
  return out;
}

json DurationStats(const std::vector<double>& d) {
  if (d.empty()) return json{{"n", 0}};
  double sum = 0.0;
  for (double v : d) sum += v;
  return json{{"n", d.size()},
              {"min", *std::min_element(d.begin(), d.end())},
              {"mean", sum / static_cast<double>(d.size())},
              {"max", *std::max_element(d.begin(), d.end())}};
}

bool ValidId(const std::string& id) {
  for (unsigned char c : id) {
    if (c == ',' || c == '"' || std::iscntrl(c)) return false;
  }
  return !id.empty();
}

absl::StatusOr<std::unique_ptr<TargetModel>> MakeTarget(
    const RunConfig& config) {
  if (config.mock) {
    ASSIGN_OR_RETURN(auto bindings,
                     ReadMockBindings(config.mock->binding_path));
    return std::make_unique<MockTarget>(config.mock->model_id,
                                        config.mock->seed, std::move(bindings),
                                        config.mock->model);
  }
  RETURN_IF_ERROR(ValidateEndpointConfig(*config.remote));
  BackoffPolicy policy;
  policy.max_retries = config.remote->max_retries;
  auto poster = std::make_shared<RetryingPoster>(
      MakeHttplibTransport(),
      std::make_shared<RateLimiter>(config.remote->requests_per_minute,
                                    Clock::Real()),
      Clock::Real(), policy);
  return std::make_unique<RemoteTarget>(*config.remote, std::move(poster));
}

GenerationRequest RequestFor(const RunConfig& config,
                             const CandidateSample& sample,
                             double temperature) {
  GenerationRequest req;
  req.sample_id = sample.id;
  req.video = sample.video;
  req.prompt = config.prompt;
  req.temperature = temperature;
  req.max_tokens = config.max_tokens;
  return req;
}

}  // namespace

std::string RunConfig::target_model_id() const {
  if (mock) return mock->model_id;
  if (remote) return remote->model_id;
  return "";
}

absl::StatusOr<RunConfig> ParseRunConfig(const std::string& yaml_text,
                                         const fs::path& base_dir) {
  RunConfig cfg;
  try {
    const YAML::Node root = YAML::Load(yaml_text);
    RETURN_IF_ERROR(ParseRoot(root, base_dir, &cfg));
  } catch (const YAML::Exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
  RETURN_IF_ERROR(ValidateRunConfig(cfg));
  return cfg;
}

absl::StatusOr<RunConfig> LoadRunConfig(const fs::path& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  absl::StatusOr<RunConfig> cfg =
      ParseRunConfig(text, fs::absolute(path).parent_path());
  if (!cfg.ok()) {
    return absl::Status(cfg.status().code(),
                        absl::StrCat(path.string(), ": ",
                                     cfg.status().message()));
  }
  return cfg;
}

absl::Status ValidateRunConfig(const RunConfig& c) {
  if (c.manifest_path.empty()) {
    return absl::InvalidArgumentError("config.manifest is required");
  }
  if (c.output_dir.empty()) {
    return absl::InvalidArgumentError("config.output_dir is required");
  }
  if (c.prompt.empty()) return absl::InvalidArgumentError("prompt is empty");
  if (!(c.tau_low >= 0.0 && c.tau_low < c.tau_high) ||
      !std::isfinite(c.tau_high)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need 0 <= tau_low < tau_high, got ", c.tau_low, " and ", c.tau_high));
  }
  if (c.max_tokens < 1) {
    return absl::InvalidArgumentError("max_tokens must be >= 1");
  }
  if (c.workers < 1) return absl::InvalidArgumentError("workers must be >= 1");
  if (c.mock.has_value() == c.remote.has_value()) {
    return absl::InvalidArgumentError(
        "exactly one target backend must be selected");
  }
  if (c.mock && c.mock->binding_path.empty()) {
    return absl::InvalidArgumentError("target.mock.binding_path is required");
  }
  if (c.remote) RETURN_IF_ERROR(ValidateEndpointConfig(*c.remote));
  RETURN_IF_ERROR(ValidateEmbedderConfig(c.embedder));
  RETURN_IF_ERROR(ValidateFlowParams(c.flow));
  if (c.protocol.classifiers.empty()) {
    return absl::InvalidArgumentError("evaluation.classifiers is empty");
  }
  if (!(c.protocol.train_fraction > 0.0 && c.protocol.train_fraction < 1.0)) {
    return absl::InvalidArgumentError("train_fraction must be in (0, 1)");
  }
  if (c.protocol.workers < 1) {
    return absl::InvalidArgumentError("evaluation.workers must be >= 1");
  }
  if (!(c.caliper >= 0.0) || !std::isfinite(c.caliper)) {
    return absl::InvalidArgumentError("matching.caliper must be >= 0");
  }
  if (c.match_n_per_class < 0) {
    return absl::InvalidArgumentError("matching.n_per_class must be >= 0");
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// Manifest.

absl::StatusOr<std::vector<ManifestEntry>> ParseManifest(
    const std::string& text, const fs::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> errors;
  std::map<std::string, int> first_line;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    auto fail = [&](const std::string& msg) {
      errors.push_back(absl::StrCat("line ", line_no, ": ", msg));
    };
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      fail("not a JSON object");
      continue;
    }
    ManifestEntry e;
    e.line = line_no;
    CandidateSample& s = e.sample;
    bool ok = true;
    if (!j.contains("id") || !j["id"].is_string()) {
      fail("missing string field 'id'");
      ok = false;
    } else {
      s.id = j["id"].get<std::string>();
      if (!ValidId(s.id)) {
        fail(absl::StrCat("id '", s.id,
                          "' is empty or contains a comma, quote or control "
                          "character"));
        ok = false;
      }
    }
    if (!j.contains("reference_text") || !j["reference_text"].is_string() ||
        absl::StripAsciiWhitespace(j["reference_text"].get<std::string>())
            .empty()) {
      fail("missing or empty 'reference_text'");
      ok = false;
    } else {
      s.reference_text = j["reference_text"].get<std::string>();
    }
    const bool has_frames = j.contains("frames_dir");
    const bool has_desc = j.contains("descriptors_path");
    if (has_frames == has_desc) {
      fail("exactly one of 'frames_dir' or 'descriptors_path' is required");
      ok = false;
    } else {
      const json& p = has_frames ? j["frames_dir"] : j["descriptors_path"];
      if (!p.is_string() || p.get<std::string>().empty()) {
        fail("video path must be a non-empty string");
        ok = false;
      } else {
        s.video.kind = has_frames ? VideoRef::Kind::kFrameDirectory
                                  : VideoRef::Kind::kDescriptorFile;
        s.video.path = Resolve(base_dir, p.get<std::string>());
      }
    }
    if (j.contains("label") && !j["label"].is_null()) {
      const json& l = j["label"];
      if (l.is_number_integer() && (l.get<int>() == 0 || l.get<int>() == 1)) {
        s.label =
            l.get<int>() == 1 ? Membership::kMember : Membership::kNonMember;
      } else {
        fail("label must be 0, 1 or absent");
        ok = false;
      }
    }
    if (j.contains("source")) {
      if (!j["source"].is_string()) {
        fail("source must be a string");
        ok = false;
      } else {
        s.source_tag = j["source"].get<std::string>();
      }
    }
    if (!s.id.empty()) {
      auto [it, inserted] = first_line.emplace(s.id, line_no);
      if (!inserted) {
        fail(absl::StrCat("duplicate id '", s.id, "' (first on line ",
                          it->second, ")"));
        ok = false;
      }
    }
    if (ok) entries.push_back(std::move(e));
  }
  if (!errors.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(errors.size(), " invalid manifest line(s):\n",
                     absl::StrJoin(errors, "\n")));
  }
  if (entries.empty()) return absl::InvalidArgumentError("manifest is empty");
  return entries;
}

absl::StatusOr<std::vector<ManifestEntry>> ReadManifest(const fs::path& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  absl::StatusOr<std::vector<ManifestEntry>> entries =
      ParseManifest(text, fs::absolute(path).parent_path());
  if (!entries.ok()) {
    return absl::Status(entries.status().code(),
                        absl::StrCat(path.string(), ": ",
                                     entries.status().message()));
  }
  return entries;
}

std::string ManifestLine(const CandidateSample& s) {
  json j = {{"id", s.id}};
  j[s.video.kind == VideoRef::Kind::kFrameDirectory ? "frames_dir"
                                                    : "descriptors_path"] =
      s.video.path;
  j["reference_text"] = s.reference_text;
  if (s.label) j["label"] = ToBit(*s.label);
  if (!s.source_tag.empty()) j["source"] = s.source_tag;
  return j.dump();
}

absl::StatusOr<std::map<std::string, MockBinding>> ReadMockBindings(
    const fs::path& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  std::map<std::string, MockBinding> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j["id"].is_string() || !j.contains("reference_text") ||
        !j["reference_text"].is_string() || !j.contains("label") ||
        !j["label"].is_number_integer()) {
      return absl::InvalidArgumentError(absl::StrCat(
          path.string(), ": line ", line_no,
          ": expected {\"id\", \"reference_text\", \"label\"}"));
    }
    ASSIGN_OR_RETURN(Membership m, MembershipFromBit(j["label"].get<int>()));
    out[j["id"].get<std::string>()] =
        MockBinding{j["reference_text"].get<std::string>(), m};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

CommandResult CmdIngest(const fs::path& manifest_path,
                        const fs::path& summary_path) {
  absl::StatusOr<std::vector<ManifestEntry>> entries =
      ReadManifest(manifest_path);
  if (!entries.ok()) return Failure(kExitHard, entries.status());
  std::vector<std::string> errors;
  std::vector<double> member_d, nonmember_d, unlabeled_d;
  std::map<std::string, int> sources;
  for (const ManifestEntry& e : *entries) {
    absl::StatusOr<double> d = ResolveDurationSeconds(e.sample.video);
    if (!d.ok()) {
      errors.push_back(absl::StrCat("line ", e.line, " ('", e.sample.id,
                                    "'): ", d.status().message()));
      continue;
    }
    if (!e.sample.label) {
      unlabeled_d.push_back(*d);
    } else if (*e.sample.label == Membership::kMember) {
      member_d.push_back(*d);
    } else {
      nonmember_d.push_back(*d);
    }
    ++sources[e.sample.source_tag];
  }
  if (!errors.empty()) {
    return Failure(kExitHard,
                   absl::InvalidArgumentError(absl::StrCat(
                       manifest_path.string(), ": ", errors.size(),
                       " unreadable video reference(s):\n",
                       absl::StrJoin(errors, "\n"))));
  }
  CommandResult r;
  r.summary = json{{"manifest", manifest_path.string()},
                   {"n_samples", entries->size()},
                   {"members", member_d.size()},
                   {"nonmembers", nonmember_d.size()},
                   {"unlabeled", unlabeled_d.size()},
                   {"duration_seconds",
                    {{"members", DurationStats(member_d)},
                     {"nonmembers", DurationStats(nonmember_d)},
                     {"unlabeled", DurationStats(unlabeled_d)}}},
                   {"sources", sources}};
  if (!summary_path.empty()) {
    if (summary_path.has_parent_path()) {
      absl::Status made = EnsureDirectory(summary_path.parent_path());
      if (!made.ok()) return Failure(kExitHard, made);
    }
    absl::Status w = WriteFile(summary_path, r.summary.dump(2) + "\n");
    if (!w.ok()) return Failure(kExitHard, w);
  }
  r.message = absl::StrCat(entries->size(), " samples: ", member_d.size(),
                           " members, ", nonmember_d.size(), " non-members, ",
                           unlabeled_d.size(), " unlabeled");
  return r;
}

CommandResult CmdMatch(const RunConfig& config) {
  absl::StatusOr<std::vector<ManifestEntry>> entries =
      ReadManifest(config.manifest_path);
  if (!entries.ok()) return Failure(kExitHard, entries.status());
  std::vector<DurationTaggedSample> members, nonmembers;
  for (const ManifestEntry& e : *entries) {
    if (!e.sample.label) continue;
    absl::StatusOr<double> d = ResolveDurationSeconds(e.sample.video);
    if (!d.ok()) {
      return Failure(kExitHard,
                     absl::Status(d.status().code(),
                                  absl::StrCat("sample '", e.sample.id,
                                               "': ", d.status().message())));
    }
    (*e.sample.label == Membership::kMember ? members : nonmembers)
        .push_back(DurationTaggedSample{e.sample, *d});
  }
  int n = config.match_n_per_class;
  if (n == 0) n = static_cast<int>(std::min(members.size(), nonmembers.size()));
  if (n == 0) {
    return Failure(kExitHard, absl::FailedPreconditionError(
                                  "manifest lacks labeled samples of both "
                                  "classes"));
  }
  absl::StatusOr<MatchedPool> pool = LengthMatchedSample(
      members, nonmembers, n, config.caliper, config.match_seed);
  if (!pool.ok()) return Failure(kExitHard, pool.status());
  absl::Status made = EnsureDirectory(config.output_dir);
  if (!made.ok()) return Failure(kExitHard, made);
  std::string lines;
  for (size_t i = 0; i < pool->members.size(); ++i) {
    absl::StrAppend(&lines, ManifestLine(pool->members[i]), "\n",
                    ManifestLine(pool->nonmembers[i]), "\n");
  }
  const fs::path out_dir(config.output_dir);
  CommandResult r;
  r.summary = json{{"pairs", pool->members.size()},
                   {"caliper", config.caliper},
                   {"seed", config.match_seed},
                   {"mean_abs_log_duration_gap", pool->mean_abs_log_gap},
                   {"max_abs_log_duration_gap",
                    *std::max_element(pool->abs_log_gaps.begin(),
                                      pool->abs_log_gaps.end())}};
  for (absl::Status s :
       {WriteFile(out_dir / kMatchedManifestFile, lines),
        WriteFile(out_dir / kMatchSummaryFile, r.summary.dump(2) + "\n")}) {
    if (!s.ok()) return Failure(kExitHard, s);
  }
  r.message = absl::StrCat(pool->members.size(), " matched pairs, mean gap ",
                           pool->mean_abs_log_gap);
  return r;
}

CommandResult CmdQuery(const RunConfig& config, TargetModel* target) {
  absl::StatusOr<std::vector<ManifestEntry>> entries =
      ReadManifest(config.manifest_path);
  if (!entries.ok()) return Failure(kExitHard, entries.status());
  std::unique_ptr<TargetModel> owned;
  if (target == nullptr) {
    absl::StatusOr<std::unique_ptr<TargetModel>> made = MakeTarget(config);
    if (!made.ok()) return Failure(kExitHard, made.status());
    owned = std::move(*made);
    target = owned.get();
  }
  absl::Status dir = EnsureDirectory(config.output_dir);
  if (!dir.ok()) return Failure(kExitHard, dir);
  const fs::path out_dir(config.output_dir);
  absl::StatusOr<std::unique_ptr<GenerationCache>> cache =
      GenerationCache::Open((out_dir / kCacheFile).string());
  if (!cache.ok()) return Failure(kExitHard, cache.status());
  CachingTarget caching(target, cache->get());

  std::vector<absl::Status> outcomes(entries->size());
  ParallelFor(entries->size(), config.workers, [&](size_t i) {
    outcomes[i] = QueryPair(caching, (*entries)[i].sample, config.prompt,
                            config.tau_low, config.tau_high,
                            config.max_tokens)
                      .status();
  });

  std::vector<json> failures;
  for (size_t i = 0; i < entries->size(); ++i) {
    if (outcomes[i].ok()) continue;
    failures.push_back(json{{"id", (*entries)[i].sample.id},
                            {"code", absl::StatusCodeToString(
                                         outcomes[i].code())},
                            {"error", std::string(outcomes[i].message())}});
  }
  CommandResult r;
  r.summary = json{{"samples", entries->size()},
                   {"succeeded", entries->size() - failures.size()},
                   {"failed", failures.size()},
                   {"new_calls", caching.inner_calls()},
                   {"cache_records", (*cache)->size()},
                   {"model_id", target->model_id()}};
  for (absl::Status s :
       {WriteFile(out_dir / kQueryFailuresFile, JsonLines(failures)),
        WriteFile(out_dir / kQueryProgressFile, r.summary.dump(2) + "\n")}) {
    if (!s.ok()) return Failure(kExitHard, s);
  }
  if (!failures.empty()) r.exit_code = kExitPartial;
  r.message = absl::StrCat(entries->size() - failures.size(), "/",
                           entries->size(), " samples queried, ",
                           caching.inner_calls(), " new calls");
  return r;
}

CommandResult CmdFeatures(const RunConfig& config) {
  absl::StatusOr<std::vector<ManifestEntry>> entries =
      ReadManifest(config.manifest_path);
  if (!entries.ok()) return Failure(kExitHard, entries.status());
  const fs::path out_dir(config.output_dir);
  const fs::path cache_path = out_dir / kCacheFile;
  if (!fs::exists(cache_path)) {
    return Failure(kExitHard,
                   absl::FailedPreconditionError(absl::StrCat(
                       "no generation cache at ", cache_path.string(),
                       "; run the query stage first")));
  }
  absl::StatusOr<std::unique_ptr<GenerationCache>> cache =
      GenerationCache::Open(cache_path.string());
  if (!cache.ok()) return Failure(kExitHard, cache.status());
  absl::StatusOr<std::unique_ptr<Embedder>> embedder =
      MakeEmbedder(config.embedder);
  if (!embedder.ok()) return Failure(kExitHard, embedder.status());
  const std::string model_id = config.target_model_id();

  struct RowOutcome {
    std::optional<FeatureVector> row;
    std::vector<std::string> flags;
    std::string exclusion;
  };
  std::vector<RowOutcome> outcomes(entries->size());
  ParallelFor(entries->size(), config.workers, [&](size_t i) {
    const CandidateSample& s = (*entries)[i].sample;
    RowOutcome& out = outcomes[i];
    std::vector<std::string> missing;
    std::optional<GenerationRecord> low = (*cache)->Lookup(CacheKey::ForRequest(
        RequestFor(config, s, config.tau_low), model_id));
    std::optional<GenerationRecord> high =
        (*cache)->Lookup(CacheKey::ForRequest(
            RequestFor(config, s, config.tau_high), model_id));
    if (!low) missing.push_back(absl::StrCat("tau=", config.tau_low));
    if (!high) missing.push_back(absl::StrCat("tau=", config.tau_high));
    if (!missing.empty()) {
      out.exclusion = absl::StrCat("no cached generation at ",
                                   absl::StrJoin(missing, ", "));
      return;
    }
    absl::StatusOr<std::vector<EmbeddingResult>> emb = (*embedder)->EmbedBatch(
        {s.reference_text, low->response, high->response});
    if (!emb.ok()) {
      out.exclusion = absl::StrCat("embedding failed: ", emb.status().message());
      return;
    }
    const EmbeddingResult& ref = (*emb)[0];
    double sims[2] = {0.0, 0.0};
    const char* names[2] = {"sim_low", "sim_high"};
    for (int k = 0; k < 2; ++k) {
      const EmbeddingResult& gen = (*emb)[1 + k];
      absl::Status bad = !ref.ok() ? ref.status() : gen.status();
      if (bad.ok()) {
        absl::StatusOr<double> cos = CosineSimilarity(*ref, *gen);
        if (cos.ok()) {
          sims[k] = *cos;
          if (ref->truncated || gen->truncated) {
            out.flags.push_back(absl::StrCat(names[k], ": truncated input"));
          }
          continue;
        }
        bad = cos.status();
      }
      if (bad.code() != absl::StatusCode::kFailedPrecondition) {
        out.exclusion = absl::StrCat(names[k], ": ", bad.message());
        return;
      }
      out.flags.push_back(
          absl::StrCat(names[k], " degenerate, set to 0: ", bad.message()));
    }
    absl::StatusOr<DifficultyDescriptors> desc =
        ComputeDescriptors(s.video, config.flow);
    if (!desc.ok()) {
      out.exclusion =
          absl::StrCat("descriptors failed: ", desc.status().message());
      return;
    }
    absl::StatusOr<FeatureVector> f =
        BuildFeatureVector(s.id, sims[0], sims[1], *desc, s.label);
    if (!f.ok()) {
      out.exclusion = absl::StrCat("feature build failed: ", f.status().message());
      return;
    }
    out.row = std::move(*f);
  });

  std::vector<FeatureVector> rows;
  std::vector<json> flags, exclusions;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const std::string& id = (*entries)[i].sample.id;
    if (outcomes[i].row) rows.push_back(*outcomes[i].row);
    for (const std::string& f : outcomes[i].flags) {
      flags.push_back(json{{"id", id}, {"flag", f}});
    }
    if (!outcomes[i].exclusion.empty()) {
      exclusions.push_back(json{{"id", id}, {"reason", outcomes[i].exclusion}});
    }
  }
  for (absl::Status s :
       {WriteFile(out_dir / kFeaturesFile, FeatureCsv(rows)),
        WriteFile(out_dir / kFeatureFlagsFile, JsonLines(flags)),
        WriteFile(out_dir / kFeatureExclusionsFile, JsonLines(exclusions))}) {
    if (!s.ok()) return Failure(kExitHard, s);
  }
  CommandResult r;
  r.summary = json{{"rows", rows.size()},
                   {"flagged", flags.size()},
                   {"excluded", exclusions.size()}};
  if (rows.empty()) {
    r.exit_code = kExitHard;
  } else if (!exclusions.empty()) {
    r.exit_code = kExitPartial;
  }
  r.message = absl::StrCat(rows.size(), " feature rows, ", exclusions.size(),
                           " excluded, ", flags.size(), " flags");
  return r;
}

CommandResult CmdEvaluate(const RunConfig& config,
                          const fs::path& features_path) {
  const fs::path out_dir(config.output_dir);
  const fs::path in =
      features_path.empty() ? out_dir / kFeaturesFile : features_path;
  absl::StatusOr<std::vector<FeatureVector>> features = ReadFeatureCsv(in);
  if (!features.ok()) return Failure(kExitHard, features.status());
  std::vector<FeatureVector> labeled;
  for (FeatureVector& f : *features) {
    if (f.label) labeled.push_back(std::move(f));
  }
  absl::StatusOr<EvaluationReport> report =
      RunProtocol(labeled, config.protocol);
  if (!report.ok()) return Failure(kExitHard, report.status());
  absl::Status made = EnsureDirectory(out_dir);
  if (!made.ok()) return Failure(kExitHard, made);
  for (absl::Status s :
       {WriteFile(out_dir / kReportFile, report->ToJson().dump(2) + "\n"),
        WriteFile(out_dir / kPerSeedFile, report->PerSeedCsv())}) {
    if (!s.ok()) return Failure(kExitHard, s);
  }
  CommandResult r;
  r.summary = report->ToJson();
  std::vector<std::string> parts;
  for (const ClassifierSummary& s : report->summaries) {
    parts.push_back(absl::StrFormat("%s AUC %.4f+/-%.4f ACC %.4f",
                                    ClassifierName(s.kind), s.mean_auc,
                                    s.std_auc, s.mean_acc));
  }
  r.message = absl::StrJoin(parts, "; ");
  return r;
}

namespace {

std::string CorpusConfigYaml(const SimulateOptions& o) {
  return absl::StrCat(
      "# Generated for a synthetic mock corpus.\n"
      "manifest: manifest.jsonl\n"
      "output_dir: run\n"
      "workers: ", o.workers, "\n"
      "target:\n"
      "  mock:\n"
      "    binding_path: mock_binding.jsonl\n"
      "    seed: ", o.corpus.seed, "\n"
      "embedder:\n"
      "  kind: hashing\n"
      "evaluation:\n"
      "  seeds: {start: 0, count: ", o.seed_count, "}\n"
      "  workers: ", o.workers, "\n");
}

CommandResult Chain(std::initializer_list<std::function<CommandResult()>> steps,
                    json* summary) {
  CommandResult last;
  int worst = kExitOk;
  std::vector<std::string> messages;
  for (const auto& step : steps) {
    last = step();
    messages.push_back(last.message);
    summary->push_back(last.summary);
    worst = std::max(worst, last.exit_code);
    if (last.exit_code == kExitHard || last.exit_code == kExitUsage) break;
  }
  last.exit_code = worst;
  last.message = absl::StrJoin(messages, "\n");
  return last;
}

}  // namespace

CommandResult CmdSimulate(const SimulateOptions& o) {
  if (o.output_dir.empty()) {
    return Failure(kExitUsage,
                   absl::InvalidArgumentError("output directory is required"));
  }
  if (o.seed_count < 1 || o.workers < 1) {
    return Failure(kExitUsage, absl::InvalidArgumentError(
                                   "seed count and workers must be >= 1"));
  }
  absl::Status made = EnsureDirectory(o.output_dir);
  if (!made.ok()) return Failure(kExitHard, made);

  if (o.mode == SimulateOptions::Mode::kCorpus) {
    absl::StatusOr<MockCorpus> corpus =
        GenerateMockCorpus(o.corpus, o.output_dir);
    if (!corpus.ok()) {
      return Failure(corpus.status().code() ==
                             absl::StatusCode::kInvalidArgument
                         ? kExitUsage
                         : kExitHard,
                     corpus.status());
    }
    const fs::path config_path = o.output_dir / "config.yaml";
    absl::Status w = WriteFile(config_path, CorpusConfigYaml(o));
    if (!w.ok()) return Failure(kExitHard, w);
    CommandResult r;
    r.summary = json{{"samples", corpus->samples.size()},
                     {"manifest", corpus->manifest_path.string()},
                     {"bindings", corpus->binding_path.string()},
                     {"config", config_path.string()}};
    r.message = absl::StrCat("wrote ", corpus->samples.size(),
                             "-sample corpus to ", o.output_dir.string());
    if (!o.run) return r;
    absl::StatusOr<RunConfig> cfg = LoadRunConfig(config_path);
    if (!cfg.ok()) return Failure(kExitHard, cfg.status());
    json stages = json::array();
    CommandResult chained = Chain({[&] { return CmdQuery(*cfg); },
                                   [&] { return CmdFeatures(*cfg); },
                                   [&] { return CmdEvaluate(*cfg); }},
                                  &stages);
    r.summary["stages"] = stages;
    r.exit_code = chained.exit_code;
    r.message = absl::StrCat(r.message, "\n", chained.message);
    return r;
  }

  OracleConfig oracle = o.oracle;
  if (o.target_auc) {
    absl::StatusOr<OracleConfig> calibrated =
        CalibrateEffect(*o.target_auc, oracle);
    if (!calibrated.ok()) return Failure(kExitUsage, calibrated.status());
    oracle = *calibrated;
  }
  absl::StatusOr<OracleDataset> data = GenerateFeatures(oracle);
  if (!data.ok()) return Failure(kExitUsage, data.status());
  const fs::path features_path = o.output_dir / kFeaturesFile;
  CommandResult r;
  r.summary = json{{"rows", data->features.size()},
                   {"member_drift_boost", oracle.member_drift_boost},
                   {"noise_sd", oracle.noise_sd},
                   {"analytic_auc", AnalyticDriftAuc(oracle.member_drift_boost,
                                                     oracle.noise_sd)},
                   {"clip_rate", data->clip_rate},
                   {"seed", oracle.seed}};
  for (absl::Status s :
       {WriteFile(features_path, FeatureCsv(data->features)),
        WriteFile(o.output_dir / "oracle.json", r.summary.dump(2) + "\n")}) {
    if (!s.ok()) return Failure(kExitHard, s);
  }
  r.message = absl::StrCat("wrote ", data->features.size(),
                           " synthetic feature rows (boost ",
                           oracle.member_drift_boost, ")");
  if (!o.run) return r;
  RunConfig cfg;
  cfg.output_dir = o.output_dir.string();
  cfg.protocol.seeds.clear();
  for (int i = 0; i < o.seed_count; ++i) cfg.protocol.seeds.push_back(i);
  cfg.protocol.workers = o.workers;
  CommandResult eval = CmdEvaluate(cfg, features_path);
  r.summary["report"] = eval.summary;
  r.exit_code = eval.exit_code;
  r.message = absl::StrCat(r.message, "\n", eval.message);
  return r;
}

}  // namespace vidaudit
