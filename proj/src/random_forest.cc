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

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "classifiers_internal.h"
#include "vidaudit/classifiers.h"
#include "vidaudit/hashing.h"

namespace vidaudit {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

// Grows one CART tree with Gini impurity. Nodes are split whenever they are
// impure, the depth budget allows it and some candidate threshold leaves at
// least min_leaf rows on each side, even if the impurity does not drop (XOR
// needs a zero-gain first split).
class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureRow> x, std::span<const int> y,
              const RandomForestOptions& options, std::mt19937_64& rng)
      : x_(x), y_(y), options_(options), rng_(rng) {}

  DecisionTree Build(std::vector<size_t> rows) {
    Grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int Grow(std::vector<size_t>& rows, int depth) {
    const int node_index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    size_t positives = 0;
    for (size_t r : rows) positives += static_cast<size_t>(y_[r]);
    const size_t n = rows.size();
    tree_.nodes[node_index].value =
        static_cast<double>(positives) / static_cast<double>(n);

    const bool pure = positives == 0 || positives == n;
    const bool depth_exhausted =
        options_.max_depth >= 0 && depth >= options_.max_depth;
    const size_t min_leaf = static_cast<size_t>(std::max(1, options_.min_leaf));
    if (pure || depth_exhausted || n < 2 * min_leaf) return node_index;

    std::optional<Split> split = FindSplit(rows, min_leaf);
    if (!split) return node_index;

    std::vector<size_t> left, right;
    for (size_t r : rows) {
      (x_[r][split->feature] <= split->threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = Grow(left, depth + 1);
    const int rt = Grow(right, depth + 1);
    TreeNode& node = tree_.nodes[node_index];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = rt;
    return node_index;
  }

  // Draws features in random order and evaluates at least max_features of
  // them, continuing past that only while no valid split has been found.
  std::optional<Split> FindSplit(const std::vector<size_t>& rows,
                                 size_t min_leaf) {
    std::array<int, kFeatureDim> order;
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);
    const int max_features =
        std::clamp(options_.max_features, 1, kFeatureDim);
    std::optional<Split> best;
    std::vector<std::pair<double, int>> values(rows.size());
    const size_t n = rows.size();
    size_t total_pos = 0;
    for (size_t r : rows) total_pos += static_cast<size_t>(y_[r]);

    for (int k = 0; k < kFeatureDim; ++k) {
      if (k >= max_features && best) break;
      const int f = order[k];
      for (size_t i = 0; i < n; ++i) {
        values[i] = {x_[rows[i]][f], y_[rows[i]]};
      }
      std::sort(values.begin(), values.end());
      size_t left_pos = 0;
      for (size_t i = 0; i + 1 < n; ++i) {
        left_pos += static_cast<size_t>(values[i].second);
        if (values[i].first == values[i + 1].first) continue;
        const size_t nl = i + 1;
        const size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const size_t right_pos = total_pos - left_pos;
        // n/2 times the weighted Gini impurity of the two children.
        const double impurity =
            static_cast<double>(left_pos * (nl - left_pos)) / nl +
            static_cast<double>(right_pos * (nr - right_pos)) / nr;
        if (!best || impurity < best->impurity) {
          double mid = 0.5 * (values[i].first + values[i + 1].first);
          if (!(mid < values[i + 1].first)) mid = values[i].first;
          best = Split{f, mid, impurity};
        }
      }
    }
    return best;
  }

  std::span<const FeatureRow> x_;
  std::span<const int> y_;
  const RandomForestOptions& options_;
  std::mt19937_64& rng_;
  DecisionTree tree_;
};

}  // namespace

double DecisionTree::Predict(const FeatureRow& x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                   : nodes[i].right;
  }
  return nodes[i].value;
}

double Forest::Predict(const FeatureRow& x) const {
  if (trees.empty()) return 0.5;
  double sum = 0.0;
  for (const DecisionTree& t : trees) sum += t.Predict(x);
  return sum / static_cast<double>(trees.size());
}

absl::StatusOr<Forest> FitRandomForest(std::span<const FeatureRow> x,
                                       std::span<const int> y,
                                       const RandomForestOptions& options,
                                       uint64_t seed) {
  absl::Status valid = internal::ValidateTrainingData(x, y);
  if (!valid.ok()) return valid;
  if (options.n_trees < 1) {
    return absl::InvalidArgumentError("n_trees must be >= 1");
  }
  Forest forest;
  forest.trees.reserve(options.n_trees);
  const size_t n = x.size();
  for (int t = 0; t < options.n_trees; ++t) {
    std::mt19937_64 rng(MixSeed(seed, static_cast<uint64_t>(t)));
    std::vector<size_t> rows(n);
    if (options.bootstrap) {
      std::uniform_int_distribution<size_t> pick(0, n - 1);
      for (size_t& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    forest.trees.push_back(TreeBuilder(x, y, options, rng).Build(rows));
  }
  return forest;
}

}  // namespace vidaudit
