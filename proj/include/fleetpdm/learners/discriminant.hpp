// Discriminant family: LDA with pooled covariance, PDA (ridge-penalized
// covariance), and MDA (per-class Gaussian mixtures with one shared
// covariance, fit by EM from a seeded k-means++ start).
#pragma once

#include <memory>
#include <vector>

#include "fleetpdm/learners/model.hpp"

namespace fleetpdm::learners {

// Linear discriminant scores for the two classes:
//   delta_k(x) = x' S^-1 mu_k - mu_k' S^-1 mu_k / 2 + ln pi_k
// with S the (maximum-likelihood) pooled within-class covariance, plus
// lambda * I for pda. Columns with zero pooled variance are dropped before
// the solve; lda reports a genuinely singular covariance as an error while
// pda always applies at least the 1e-8 * trace(S)/p ridge floor.
class DiscriminantModel final : public TrainedModel {
 public:
  LearnerFamily family() const override { return family_; }
  double score_row(std::span<const double> row) const override;

  double ridge_used() const { return ridge_; }
  const std::vector<int>& kept_columns() const { return kept_; }

 private:
  friend class ModelReader;
  friend std::unique_ptr<DiscriminantModel> fit_linear_discriminant(
      const LearnerSpec&, const features::FeatureMatrix&, bool);

  LearnerFamily family_ = LearnerFamily::lda;
  std::vector<int> kept_;               // surviving column indices
  std::vector<double> class_means_[2];  // over kept columns
  std::vector<double> weights_[2];      // S^-1 mu_k
  double bias_[2] = {0, 0};             // -mu'S^-1 mu/2 + ln pi
  double ridge_ = 0;

  void save_params(std::ostream& out) const override;
};

struct EmDiagnostics {
  std::vector<double> log_likelihood;  // one entry per EM iteration
  bool converged = false;
  int iterations = 0;
};

class MixtureDiscriminantModel final : public TrainedModel {
 public:
  LearnerFamily family() const override { return LearnerFamily::mda; }
  double score_row(std::span<const double> row) const override;

  const EmDiagnostics& em() const { return em_; }
  const std::vector<int>& kept_columns() const { return kept_; }

 private:
  friend class ModelReader;
  friend std::unique_ptr<MixtureDiscriminantModel> fit_mixture_discriminant(
      const LearnerSpec&, const features::FeatureMatrix&);

  std::vector<int> kept_;
  double class_log_prior_[2] = {0, 0};
  std::vector<double> mix_weights_[2];           // per subclass
  std::vector<std::vector<double>> mix_means_[2];  // subclass x kept column
  std::vector<double> covariance_;               // shared, row-major p x p
  EmDiagnostics em_;

  // Derived at fit/load time, not serialized.
  std::vector<double> chol_;     // lower Cholesky factor of covariance_
  double log_det_half_ = 0;      // log det(S) / 2
  void finalize();
  double log_gaussian(std::span<const double> x, const std::vector<double>& mean) const;

  void save_params(std::ostream& out) const override;
};

std::unique_ptr<DiscriminantModel> fit_linear_discriminant(const LearnerSpec& spec,
                                                           const features::FeatureMatrix& matrix,
                                                           bool penalized);
std::unique_ptr<MixtureDiscriminantModel> fit_mixture_discriminant(
    const LearnerSpec& spec, const features::FeatureMatrix& matrix);

}  // namespace fleetpdm::learners
