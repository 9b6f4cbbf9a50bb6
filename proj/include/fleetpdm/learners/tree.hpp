// Axis-aligned binary decision trees shared by the boosted and bagged
// ensembles. Split ties are broken by lowest feature index, then lowest
// threshold, so tree construction is fully deterministic given the row
// order and (for random candidate subsets) the caller's RNG.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fleetpdm/rng.hpp"

namespace fleetpdm::learners {

struct TreeNode {
  int feature = -1;      // -1 marks a leaf
  double threshold = 0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0;      // leaf payload
};

struct Tree {
  std::vector<TreeNode> nodes;

  bool empty() const { return nodes.empty(); }
  double predict(std::span<const double> row) const;
  // Index of the leaf node the row lands in.
  int leaf_index(std::span<const double> row) const;
};

enum class SplitCriterion { variance, gini };

struct TreeParams {
  SplitCriterion criterion = SplitCriterion::variance;
  int max_depth = 0;   // 0 = unlimited
  int min_leaf = 1;
  int mtry = 0;        // 0 = consider every feature
  Rng* rng = nullptr;  // required when mtry > 0
};

// Column-major training view: columns[f][i] is feature f of row i.
struct TrainView {
  std::span<const std::vector<double>> columns;
  std::span<const double> targets;  // residuals (variance) or 0/1 labels (gini)
};

// Grows a tree over `rows` (indices into the view). Leaf values are the
// target mean (variance criterion) or majority label (gini, ties -> 0).
// If `leaf_of_row` is non-null it receives, for every index that appears
// in `rows`, the node index of the leaf that training row landed in.
Tree build_tree(const TrainView& view, std::vector<int> rows, const TreeParams& params,
                std::vector<int>* leaf_of_row = nullptr);

}  // namespace fleetpdm::learners
