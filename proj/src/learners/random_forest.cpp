#include "fleetpdm/learners/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "param_io.hpp"

namespace fleetpdm::learners {

std::unique_ptr<RandomForestModel> fit_random_forest(const LearnerSpec& spec,
                                                     const features::FeatureMatrix& matrix) {
  const std::size_t n = matrix.rows.size();
  const std::size_t p = matrix.ledger.size();

  std::vector<std::vector<double>> columns(p, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = matrix.rows[i].label;
    for (std::size_t j = 0; j < p; ++j) columns[j][i] = matrix.rows[i].values[j];
  }

  auto model = std::unique_ptr<RandomForestModel>(new RandomForestModel());
  model->seed_ = spec.seed;
  int mtry = spec.rf_mtry > 0 ? spec.rf_mtry
                              : static_cast<int>(std::floor(std::sqrt(static_cast<double>(p))));
  mtry = std::clamp(mtry, 1, static_cast<int>(p));
  model->mtry_used_ = mtry;

  TrainView view{std::span(columns), std::span<const double>(y)};
  std::vector<char> in_bag(n);
  for (int t = 0; t < spec.rf_n_trees; ++t) {
    Rng rng(substream_seed(spec.seed, "rf.tree", static_cast<std::uint64_t>(t)));
    std::fill(in_bag.begin(), in_bag.end(), 0);
    std::vector<int> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto pick = static_cast<std::size_t>(rng.uniform_below(n));
      rows[i] = static_cast<int>(pick);
      in_bag[pick] = 1;
    }

    TreeParams params;
    params.criterion = SplitCriterion::gini;
    params.max_depth = 0;
    params.min_leaf = spec.rf_min_leaf;
    params.mtry = mtry;
    params.rng = &rng;
    model->trees_.push_back(build_tree(view, std::move(rows), params));

    std::vector<int> oob;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_bag[i]) oob.push_back(static_cast<int>(i));
    }
    model->oob_.push_back(std::move(oob));
  }
  return model;
}

double RandomForestModel::score_row(std::span<const double> row) const {
  long votes = 0;
  for (const auto& tree : trees_) votes += tree.predict(row) >= 0.5 ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

std::vector<double> oob_permutation_importance(const TrainedModel& model,
                                               const features::FeatureMatrix& matrix) {
  const auto* forest = dynamic_cast<const RandomForestModel*>(&model);
  if (forest == nullptr) {
    throw std::invalid_argument("oob_permutation_importance: model is not a random forest");
  }
  if (model.ledger() != matrix.ledger) {
    throw std::invalid_argument("oob_permutation_importance: ledger mismatch");
  }
  if (static_cast<long>(matrix.rows.size()) != model.training_rows()) {
    throw std::invalid_argument(
        "oob_permutation_importance: matrix is not the model's training matrix");
  }

  const std::size_t p = matrix.ledger.size();
  std::vector<double> importance(p, 0.0);
  long trees_used = 0;
  std::vector<double> scratch;
  std::vector<double> permuted;

  for (std::size_t t = 0; t < forest->trees().size(); ++t) {
    const auto& oob = forest->oob_rows()[t];
    if (oob.empty()) continue;
    ++trees_used;
    const auto& tree = forest->trees()[t];
    const double denom = static_cast<double>(oob.size());

    long base_correct = 0;
    for (int i : oob) {
      const auto& row = matrix.rows[static_cast<std::size_t>(i)];
      int pred = tree.predict(row.values) >= 0.5 ? 1 : 0;
      base_correct += pred == row.label;
    }

    for (std::size_t j = 0; j < p; ++j) {
      permuted.resize(oob.size());
      for (std::size_t k = 0; k < oob.size(); ++k) {
        permuted[k] = matrix.rows[static_cast<std::size_t>(oob[k])].values[j];
      }
      Rng rng(substream_seed(forest->seed(), "rf.perm", static_cast<std::uint64_t>(t),
                             static_cast<std::uint64_t>(j)));
      rng.shuffle(permuted);

      long perm_correct = 0;
      for (std::size_t k = 0; k < oob.size(); ++k) {
        const auto& row = matrix.rows[static_cast<std::size_t>(oob[k])];
        scratch.assign(row.values.begin(), row.values.end());
        scratch[j] = permuted[k];
        int pred = tree.predict(scratch) >= 0.5 ? 1 : 0;
        perm_correct += pred == row.label;
      }
      importance[j] += static_cast<double>(base_correct - perm_correct) / denom;
    }
  }
  if (trees_used > 0) {
    for (auto& v : importance) v /= static_cast<double>(trees_used);
  }
  return importance;
}

void RandomForestModel::save_params(std::ostream& out) const {
  out << "mtry " << mtry_used_ << '\n';
  out << "seed " << seed_ << '\n';
  out << "trees " << trees_.size() << '\n';
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    out << "nodes " << trees_[t].nodes.size() << '\n';
    for (const auto& n : trees_[t].nodes) {
      out << n.feature << ' ';
      write_real(out, n.threshold);
      out << ' ' << n.left << ' ' << n.right << ' ';
      write_real(out, n.value);
      out << '\n';
    }
    out << "oob " << oob_[t].size();
    for (int i : oob_[t]) out << ' ' << i;
    out << '\n';
  }
}

}  // namespace fleetpdm::learners
