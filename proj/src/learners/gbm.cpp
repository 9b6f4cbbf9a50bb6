#include "fleetpdm/learners/gbm.hpp"

#include <algorithm>
#include <cmath>

#include "param_io.hpp"

namespace fleetpdm::learners {

namespace {

constexpr double kMaxLeafValue = 4.0;
constexpr double kHessianFloor = 1e-12;
constexpr int kMaxHalvings = 40;

double log1pexp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Mean binomial deviance of margins F against 0/1 labels.
double mean_deviance(const std::vector<double>& f, const std::vector<double>& y) {
  double total = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    total += y[i] > 0.5 ? log1pexp(-f[i]) : log1pexp(f[i]);
  }
  return total / static_cast<double>(f.size());
}

}  // namespace

std::unique_ptr<GbmModel> fit_gbm(const LearnerSpec& spec, const features::FeatureMatrix& matrix) {
  const std::size_t n = matrix.rows.size();
  const std::size_t p = matrix.ledger.size();

  std::vector<std::vector<double>> columns(p, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = matrix.rows[i].label;
    for (std::size_t j = 0; j < p; ++j) columns[j][i] = matrix.rows[i].values[j];
  }

  auto model = std::unique_ptr<GbmModel>(new GbmModel());
  double pbar = 0;
  for (double v : y) pbar += v;
  pbar /= static_cast<double>(n);
  pbar = std::clamp(pbar, 1e-12, 1.0 - 1e-12);
  model->f0_ = std::log(pbar / (1.0 - pbar));

  std::vector<double> f(n, model->f0_);
  std::vector<double> residual(n);
  double deviance = mean_deviance(f, y);
  model->deviance_.push_back(deviance);

  std::vector<int> all_rows(n);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = static_cast<int>(i);

  TreeParams params;
  params.criterion = SplitCriterion::variance;
  params.max_depth = spec.gbm_max_depth;
  params.min_leaf = 1;

  for (int stage = 0; stage < spec.gbm_n_trees; ++stage) {
    std::vector<double> prob(n);
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(f[i]);
      residual[i] = y[i] - prob[i];
    }

    TrainView view{std::span(columns), std::span<const double>(residual)};
    std::vector<int> leaf_of_row(n, -1);
    Tree tree = build_tree(view, all_rows, params, &leaf_of_row);

    // One Newton step per leaf on the deviance, scaled by the shrinkage.
    std::vector<double> num(tree.nodes.size(), 0), den(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto leaf = static_cast<std::size_t>(leaf_of_row[i]);
      num[leaf] += residual[i];
      den[leaf] += prob[i] * (1.0 - prob[i]);
    }
    for (auto& node : tree.nodes) {
      if (node.feature >= 0) continue;
      std::size_t idx = static_cast<std::size_t>(&node - tree.nodes.data());
      double step = num[idx] / std::max(den[idx], kHessianFloor);
      node.value = spec.gbm_shrinkage * std::clamp(step, -kMaxLeafValue, kMaxLeafValue);
    }

    // The stage is a descent direction; halve it in the rare case numerical
    // overshoot would raise the training deviance, keeping the recorded
    // trace non-increasing by construction.
    std::vector<double> f_next(n);
    double next_deviance = 0;
    int halvings = 0;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) {
        f_next[i] = f[i] + tree.nodes[static_cast<std::size_t>(leaf_of_row[i])].value;
      }
      next_deviance = mean_deviance(f_next, y);
      if (next_deviance <= deviance || halvings >= kMaxHalvings) break;
      for (auto& node : tree.nodes) {
        if (node.feature < 0) node.value *= 0.5;
      }
      ++halvings;
    }
    if (next_deviance > deviance) {
      // Give up on the stage entirely rather than regress.
      for (auto& node : tree.nodes) {
        if (node.feature < 0) node.value = 0;
      }
      f_next = f;
      next_deviance = deviance;
    }

    f = std::move(f_next);
    deviance = next_deviance;
    model->deviance_.push_back(deviance);
    model->trees_.push_back(std::move(tree));
  }
  return model;
}

double GbmModel::score_row(std::span<const double> row) const {
  double margin = f0_;
  for (const auto& tree : trees_) margin += tree.predict(row);
  return sigmoid(margin);
}

void GbmModel::save_params(std::ostream& out) const {
  out << "f0 ";
  write_real(out, f0_);
  out << '\n';
  out << "deviance " << deviance_.size();
  write_real_list(out, deviance_);
  out << '\n';
  out << "trees " << trees_.size() << '\n';
  for (const auto& tree : trees_) {
    out << "nodes " << tree.nodes.size() << '\n';
    for (const auto& n : tree.nodes) {
      out << n.feature << ' ';
      write_real(out, n.threshold);
      out << ' ' << n.left << ' ' << n.right << ' ';
      write_real(out, n.value);
      out << '\n';
    }
  }
}

}  // namespace fleetpdm::learners
