// Random forest: bootstrap-aggregated Gini trees with mtry random split
// candidates per node and majority voting. Each tree keeps its out-of-bag
// row indices so permutation importance can be computed afterwards.
#pragma once

#include <memory>
#include <vector>

#include "fleetpdm/learners/model.hpp"
#include "fleetpdm/learners/tree.hpp"

namespace fleetpdm::learners {

class RandomForestModel final : public TrainedModel {
 public:
  LearnerFamily family() const override { return LearnerFamily::rf; }
  double score_row(std::span<const double> row) const override;

  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<std::vector<int>>& oob_rows() const { return oob_; }
  int mtry_used() const { return mtry_used_; }
  std::uint64_t seed() const { return seed_; }

 private:
  friend class ModelReader;
  friend std::unique_ptr<RandomForestModel> fit_random_forest(const LearnerSpec&,
                                                              const features::FeatureMatrix&);

  std::vector<Tree> trees_;
  std::vector<std::vector<int>> oob_;  // ascending row indices, per tree
  int mtry_used_ = 0;
  std::uint64_t seed_ = 0;

  void save_params(std::ostream& out) const override;
};

std::unique_ptr<RandomForestModel> fit_random_forest(const LearnerSpec& spec,
                                                     const features::FeatureMatrix& matrix);

// Mean decrease in out-of-bag accuracy when each feature column is permuted
// (seeded per tree and feature, averaged over trees). `matrix` must be the
// exact training matrix. Scores may be negative; a never-used feature
// scores exactly zero.
std::vector<double> oob_permutation_importance(const TrainedModel& model,
                                               const features::FeatureMatrix& matrix);

}  // namespace fleetpdm::learners
