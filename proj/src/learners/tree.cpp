#include "fleetpdm/learners/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fleetpdm::learners {

double Tree::predict(std::span<const double> row) const {
  return nodes[static_cast<std::size_t>(leaf_index(row))].value;
}

int Tree::leaf_index(std::span<const double> row) const {
  int idx = 0;
  while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    idx = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return idx;
}

namespace {

constexpr double kMinGain = 1e-12;

struct Builder {
  const TrainView& view;
  const TreeParams& params;
  Tree tree;
  std::vector<int>* leaf_of_row;
  std::vector<std::pair<double, double>> scratch;  // (feature value, target)
  std::vector<int> feature_buf;

  struct Split {
    bool found = false;
    double gain = 0;
    int feature = -1;
    double threshold = 0;
  };

  int build(std::vector<int>& rows, int depth) {
    const std::size_t n = rows.size();
    double sum = 0, sumsq = 0, ones = 0;
    for (int i : rows) {
      double t = view.targets[static_cast<std::size_t>(i)];
      sum += t;
      sumsq += t * t;
      ones += t;
    }

    bool stop = n < 2 * static_cast<std::size_t>(params.min_leaf) ||
                (params.max_depth > 0 && depth >= params.max_depth);
    if (!stop) {
      if (params.criterion == SplitCriterion::variance) {
        double sse = sumsq - sum * sum / static_cast<double>(n);
        stop = sse <= kMinGain;
      } else {
        stop = ones == 0 || ones == static_cast<double>(n);
      }
    }

    Split best;
    if (!stop) {
      best = find_split(rows, sum, sumsq, ones);
      stop = !best.found;
    }

    if (stop) {
      int idx = static_cast<int>(tree.nodes.size());
      TreeNode leaf;
      if (params.criterion == SplitCriterion::variance) {
        leaf.value = sum / static_cast<double>(n);
      } else {
        leaf.value = 2 * ones > static_cast<double>(n) ? 1.0 : 0.0;  // majority, ties -> 0
      }
      tree.nodes.push_back(leaf);
      if (leaf_of_row) {
        for (int i : rows) (*leaf_of_row)[static_cast<std::size_t>(i)] = idx;
      }
      return idx;
    }

    std::vector<int> left, right;
    left.reserve(n);
    right.reserve(n);
    const auto& col = view.columns[static_cast<std::size_t>(best.feature)];
    for (int i : rows) {
      (col[static_cast<std::size_t>(i)] <= best.threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();

    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({best.feature, best.threshold, -1, -1, 0});
    int l = build(left, depth + 1);
    int r = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(idx)].left = l;
    tree.nodes[static_cast<std::size_t>(idx)].right = r;
    return idx;
  }

  Split find_split(const std::vector<int>& rows, double sum, double sumsq, double ones) {
    const std::size_t n = rows.size();
    const int p = static_cast<int>(view.columns.size());

    const std::vector<int>* candidates = nullptr;
    if (params.mtry > 0 && params.mtry < p) {
      if (params.rng == nullptr) {
        throw std::invalid_argument("build_tree: mtry sampling requires an rng");
      }
      auto sampled = params.rng->sample_without_replacement(static_cast<std::size_t>(p),
                                                            static_cast<std::size_t>(params.mtry));
      feature_buf.assign(sampled.begin(), sampled.end());
      std::sort(feature_buf.begin(), feature_buf.end());
      candidates = &feature_buf;
    } else {
      feature_buf.resize(static_cast<std::size_t>(p));
      for (int f = 0; f < p; ++f) feature_buf[static_cast<std::size_t>(f)] = f;
      candidates = &feature_buf;
    }

    Split best;
    const double total = static_cast<double>(n);
    double parent_impurity;
    if (params.criterion == SplitCriterion::variance) {
      parent_impurity = sumsq - sum * sum / total;
    } else {
      double p1 = ones / total;
      parent_impurity = total * 2.0 * p1 * (1.0 - p1);  // n * gini
    }

    // Features ascend and thresholds ascend within a feature, so a strict
    // improvement test lands ties on the lowest feature, lowest threshold.
    for (int f : *candidates) {
      const auto& col = view.columns[static_cast<std::size_t>(f)];
      scratch.clear();
      for (int i : rows) {
        scratch.emplace_back(col[static_cast<std::size_t>(i)],
                             view.targets[static_cast<std::size_t>(i)]);
      }
      std::sort(scratch.begin(), scratch.end());
      double left_sum = 0, left_sumsq = 0, left_ones = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        double t = scratch[i].second;
        left_sum += t;
        left_sumsq += t * t;
        left_ones += t;
        if (scratch[i].first == scratch[i + 1].first) continue;
        std::size_t nl = i + 1;
        std::size_t nr = n - nl;
        if (nl < static_cast<std::size_t>(params.min_leaf) ||
            nr < static_cast<std::size_t>(params.min_leaf)) {
          continue;
        }
        double child_impurity;
        if (params.criterion == SplitCriterion::variance) {
          double sse_l = left_sumsq - left_sum * left_sum / static_cast<double>(nl);
          double right_sum = sum - left_sum;
          double right_sumsq = sumsq - left_sumsq;
          double sse_r = right_sumsq - right_sum * right_sum / static_cast<double>(nr);
          child_impurity = sse_l + sse_r;
        } else {
          double p1l = left_ones / static_cast<double>(nl);
          double p1r = (ones - left_ones) / static_cast<double>(nr);
          child_impurity = static_cast<double>(nl) * 2.0 * p1l * (1.0 - p1l) +
                           static_cast<double>(nr) * 2.0 * p1r * (1.0 - p1r);
        }
        double gain = parent_impurity - child_impurity;
        if (gain > kMinGain && (!best.found || gain > best.gain)) {
          best.found = true;
          best.gain = gain;
          best.feature = f;
          best.threshold = scratch[i].first + 0.5 * (scratch[i + 1].first - scratch[i].first);
        }
      }
    }
    return best;
  }
};

}  // namespace

Tree build_tree(const TrainView& view, std::vector<int> rows, const TreeParams& params,
                std::vector<int>* leaf_of_row) {
  if (rows.empty()) throw std::invalid_argument("build_tree: no training rows");
  if (view.columns.empty()) throw std::invalid_argument("build_tree: no feature columns");
  Builder builder{view, params, {}, leaf_of_row, {}, {}};
  builder.build(rows, 0);
  return std::move(builder.tree);
}

}  // namespace fleetpdm::learners
