// Additive MARS: forward stepwise addition of reflected hinge pairs with
// knots at observed values, least squares on the 0/1 label, then backward
// pruning that minimizes GCV(M) = (RSS/N) / (1 - C(M)/N)^2 with
// C(M) = M + penalty * (M - 1) / 2. Scores are the clamped linear response.
#pragma once

#include <memory>
#include <vector>

#include "fleetpdm/learners/model.hpp"

namespace fleetpdm::learners {

class MarsModel final : public TrainedModel {
 public:
  struct Term {
    int variable = -1;   // -1 for the intercept
    double knot = 0;
    int sign = 0;        // +1: max(0, x - t); -1: max(0, t - x); 0: intercept
  };

  LearnerFamily family() const override { return LearnerFamily::mars; }
  double score_row(std::span<const double> row) const override;

  const std::vector<Term>& terms() const { return terms_; }
  const std::vector<double>& coefficients() const { return coef_; }
  double forward_gcv() const { return forward_gcv_; }
  double pruned_gcv() const { return pruned_gcv_; }

 private:
  friend class ModelReader;
  friend std::unique_ptr<MarsModel> fit_mars(const LearnerSpec&,
                                             const features::FeatureMatrix&);

  std::vector<Term> terms_;   // terms_[0] is always the intercept
  std::vector<double> coef_;
  double forward_gcv_ = 0;
  double pruned_gcv_ = 0;

  void save_params(std::ostream& out) const override;
};

std::unique_ptr<MarsModel> fit_mars(const LearnerSpec& spec,
                                    const features::FeatureMatrix& matrix);

}  // namespace fleetpdm::learners
