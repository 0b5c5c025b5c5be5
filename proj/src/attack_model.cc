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

#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "vidaudit/classifiers.h"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

using json = nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json LinearToJson(const LinearModel& m) {
  return json{{"weights", m.weights}, {"bias", m.bias}};
}

json ForestToJson(const Forest& f) {
  json trees = json::array();
  for (const DecisionTree& t : f.trees) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back(json{{"leaf", n.value}});
      } else {
        nodes.push_back(json{{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return json{{"trees", std::move(trees)}};
}

json MlpToJson(const MlpModel& m) {
  return json{{"hidden", m.hidden},
              {"w1", m.w1},
              {"b1", m.b1},
              {"w2", m.w2},
              {"b2", m.b2}};
}

absl::StatusOr<TrainedAttackModel::Parameters> ParametersFromJson(
    ClassifierKind kind, const json& j) {
  switch (kind) {
    case ClassifierKind::kLogisticRegression:
    case ClassifierKind::kSvm: {
      LinearModel m;
      m.weights = j.at("weights").get<FeatureRow>();
      m.bias = j.at("bias").get<double>();
      return m;
    }
    case ClassifierKind::kRandomForest: {
      Forest f;
      for (const json& jt : j.at("trees")) {
        DecisionTree t;
        for (const json& jn : jt) {
          TreeNode n;
          if (jn.contains("leaf")) {
            n.value = jn.at("leaf").get<double>();
          } else {
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
          }
          t.nodes.push_back(n);
        }
        const int size = static_cast<int>(t.nodes.size());
        for (const TreeNode& n : t.nodes) {
          if (!n.is_leaf() &&
              (n.feature >= kFeatureDim || n.left <= 0 || n.right <= 0 ||
               n.left >= size || n.right >= size)) {
            return absl::InvalidArgumentError("malformed tree node");
          }
        }
        if (t.nodes.empty()) return absl::InvalidArgumentError("empty tree");
        f.trees.push_back(std::move(t));
      }
      return f;
    }
    case ClassifierKind::kMlp: {
      MlpModel m;
      m.hidden = j.at("hidden").get<int>();
      m.w1 = j.at("w1").get<std::vector<double>>();
      m.b1 = j.at("b1").get<std::vector<double>>();
      m.w2 = j.at("w2").get<std::vector<double>>();
      m.b2 = j.at("b2").get<double>();
      if (m.hidden < 1 ||
          m.w1.size() != static_cast<size_t>(m.hidden) * kFeatureDim ||
          m.b1.size() != static_cast<size_t>(m.hidden) ||
          m.w2.size() != static_cast<size_t>(m.hidden)) {
        return absl::InvalidArgumentError("MLP parameter shapes disagree");
      }
      return m;
    }
  }
  return absl::InvalidArgumentError("unknown classifier kind");
}

}  // namespace

const char* ClassifierName(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kLogisticRegression:
      return "LR";
    case ClassifierKind::kSvm:
      return "SVM";
    case ClassifierKind::kRandomForest:
      return "RF";
    case ClassifierKind::kMlp:
      return "MLP";
  }
  return "?";
}

absl::StatusOr<ClassifierKind> ParseClassifierKind(const std::string& name) {
  const std::string upper = absl::AsciiStrToUpper(name);
  if (upper == "LR") return ClassifierKind::kLogisticRegression;
  if (upper == "SVM") return ClassifierKind::kSvm;
  if (upper == "RF") return ClassifierKind::kRandomForest;
  if (upper == "MLP") return ClassifierKind::kMlp;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown classifier '", name, "' (expected LR, SVM, RF, MLP)"));
}

TrainedAttackModel::TrainedAttackModel(ClassifierKind kind,
                                       Standardizer standardizer,
                                       Parameters parameters,
                                       uint64_t train_seed,
                                       nlohmann::json hyperparameters)
    : kind_(kind),
      standardizer_(std::move(standardizer)),
      parameters_(std::move(parameters)),
      train_seed_(train_seed),
      hyperparameters_(std::move(hyperparameters)) {}

double TrainedAttackModel::Score(const FeatureRow& raw) const {
  const FeatureRow x = *standardizer_.Apply(raw);
  return std::visit(
      Overloaded{
          [&](const LinearModel& m) {
            const double margin = m.Margin(x);
            return kind_ == ClassifierKind::kSvm ? margin : Sigmoid(margin);
          },
          [&](const Forest& f) { return f.Predict(x); },
          [&](const MlpModel& m) { return m.Predict(x); }},
      parameters_);
}

std::vector<double> TrainedAttackModel::Score(
    std::span<const FeatureRow> raw) const {
  std::vector<double> out;
  out.reserve(raw.size());
  for (const FeatureRow& r : raw) out.push_back(Score(r));
  return out;
}

double TrainedAttackModel::DecisionThreshold() const {
  return kind_ == ClassifierKind::kSvm ? 0.0 : 0.5;
}

json TrainedAttackModel::ToJson() const {
  json params = std::visit(
      Overloaded{[](const LinearModel& m) { return LinearToJson(m); },
                 [](const Forest& f) { return ForestToJson(f); },
                 [](const MlpModel& m) { return MlpToJson(m); }},
      parameters_);
  return json{{"kind", ClassifierName(kind_)},
              {"standardizer", standardizer_.ToJson()},
              {"train_seed", train_seed_},
              {"hyperparameters", hyperparameters_},
              {"parameters", std::move(params)}};
}

absl::StatusOr<TrainedAttackModel> TrainedAttackModel::FromJson(
    const json& j) {
  try {
    ASSIGN_OR_RETURN(ClassifierKind kind,
                     ParseClassifierKind(j.at("kind").get<std::string>()));
    ASSIGN_OR_RETURN(Standardizer s,
                     Standardizer::FromJson(j.at("standardizer")));
    ASSIGN_OR_RETURN(Parameters p, ParametersFromJson(kind, j.at("parameters")));
    return TrainedAttackModel(kind, std::move(s), std::move(p),
                              j.at("train_seed").get<uint64_t>(),
                              j.at("hyperparameters"));
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad model JSON: ", e.what()));
  }
}

json HyperparametersToJson(ClassifierKind kind,
                           const ClassifierOptions& options) {
  switch (kind) {
    case ClassifierKind::kLogisticRegression:
      return json{{"l2", options.lr.l2},
                  {"learning_rate", options.lr.learning_rate},
                  {"max_iter", options.lr.max_iter},
                  {"tol", options.lr.tol}};
    case ClassifierKind::kSvm:
      return json{{"l2", options.svm.l2}, {"epochs", options.svm.epochs}};
    case ClassifierKind::kRandomForest:
      return json{{"n_trees", options.rf.n_trees},
                  {"max_depth", options.rf.max_depth},
                  {"min_leaf", options.rf.min_leaf},
                  {"bootstrap", options.rf.bootstrap},
                  {"max_features", options.rf.max_features}};
    case ClassifierKind::kMlp:
      return json{{"hidden_units", options.mlp.hidden_units},
                  {"learning_rate", options.mlp.learning_rate},
                  {"epochs", options.mlp.epochs}};
  }
  return json::object();
}

absl::StatusOr<TrainedAttackModel> TrainAttackModel(
    ClassifierKind kind, std::span<const FeatureRow> raw,
    std::span<const int> y, const ClassifierOptions& options, uint64_t seed) {
  ASSIGN_OR_RETURN(Standardizer s, Standardizer::Fit(raw));
  ASSIGN_OR_RETURN(std::vector<FeatureRow> x, s.Apply(raw));
  TrainedAttackModel::Parameters params;
  switch (kind) {
    case ClassifierKind::kLogisticRegression: {
      ASSIGN_OR_RETURN(params, FitLogisticRegression(x, y, options.lr));
      break;
    }
    case ClassifierKind::kSvm: {
      ASSIGN_OR_RETURN(params, FitLinearSvm(x, y, options.svm, seed));
      break;
    }
    case ClassifierKind::kRandomForest: {
      ASSIGN_OR_RETURN(params, FitRandomForest(x, y, options.rf, seed));
      break;
    }
    case ClassifierKind::kMlp: {
      ASSIGN_OR_RETURN(params, FitMlp(x, y, options.mlp, seed));
      break;
    }
  }
  return TrainedAttackModel(kind, std::move(s), std::move(params), seed,
                            HyperparametersToJson(kind, options));
}

}  // namespace vidaudit
