// Stagewise gradient boosting of depth-limited regression trees on the
// binomial deviance. Leaf values take one Newton step on the deviance and
// are stored pre-scaled by the shrinkage, so prediction is F0 plus the sum
// of tree outputs through the logistic link.
#pragma once

#include <memory>
#include <vector>

#include "fleetpdm/learners/model.hpp"
#include "fleetpdm/learners/tree.hpp"

namespace fleetpdm::learners {

class GbmModel final : public TrainedModel {
 public:
  LearnerFamily family() const override { return LearnerFamily::gbm; }
  double score_row(std::span<const double> row) const override;

  // Mean binomial deviance after each stage; index 0 is the F0 baseline.
  // Non-increasing by construction.
  const std::vector<double>& deviance_trace() const { return deviance_; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  friend class ModelReader;
  friend std::unique_ptr<GbmModel> fit_gbm(const LearnerSpec&, const features::FeatureMatrix&);

  double f0_ = 0;
  std::vector<Tree> trees_;
  std::vector<double> deviance_;

  void save_params(std::ostream& out) const override;
};

std::unique_ptr<GbmModel> fit_gbm(const LearnerSpec& spec, const features::FeatureMatrix& matrix);

}  // namespace fleetpdm::learners
