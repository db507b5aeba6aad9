#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "buggin/matrix.hpp"
#include "buggin/model_config.hpp"
#include "buggin/random.hpp"

namespace buggin {

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // left child takes x <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;   // weighted Intrinsic fraction of the node's samples
  double weight = 0.0;  // weighted sample count
  int depth = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double score(RowView x) const;
  int depth() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeOptions {
  Criterion criterion = Criterion::Gini;
  std::optional<int> max_depth;  // unset: grow until pure or blocked; 0: single leaf
  int min_samples_leaf = 1;
  int min_samples_split = 2;
  // Features drawn (without replacement, among those not constant in the
  // node) per split; 0 means every feature.
  std::size_t max_features = 0;
};

double impurity(Criterion c, double w0, double w1);

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Best split of the weighted rows; candidates are midpoints between
// consecutive distinct values. Ties keep the lowest feature, then the
// lowest threshold. feature == -1 when no split leaves min_samples_leaf
// weight on both sides.
SplitChoice best_split(const FeatureMatrix& x, std::span<const std::size_t> rows, std::span<const double> weights,
                       const TreeOptions& options, std::span<const std::uint32_t> features = {});

// Rows with zero weight are ignored. `rng` is only consulted when
// options.max_features is nonzero.
DecisionTree fit_tree(const FeatureMatrix& x, std::span<const double> weights, const TreeOptions& options,
                      Pcg32* rng = nullptr);

struct ForestOptions {
  TreeOptions tree;
  int n_estimators = 100;
  bool bootstrap = true;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  std::uint64_t seed = 0;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> seeds;

  // Mean of the trees' leaf fractions.
  double score(RowView x) const;
};

RandomForest fit_forest(const FeatureMatrix& x, const ForestOptions& options);

nlohmann::json to_json(const DecisionTree& t);
DecisionTree tree_from_json(const nlohmann::json& j);

}  // namespace buggin
