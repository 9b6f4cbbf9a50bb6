// Uniform fit/predict contract over the six classifier families. A trained
// model is immutable; predict is a pure function of (model, row) and scores
// always land in [0, 1] with the 0.5 operating point fixed.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetpdm/features.hpp"

namespace fleetpdm::learners {

enum class LearnerFamily { lda, pda, mda, mars, gbm, rf };

const char* family_name(LearnerFamily family);
LearnerFamily family_from_name(std::string_view name);  // throws on unknown name

struct LearnerSpec {
  LearnerFamily family = LearnerFamily::lda;
  std::uint64_t seed = 42;

  // pda
  double pda_lambda = 1.0;
  // mda
  int mda_subclasses = 3;
  int mda_em_max_iter = 100;
  double mda_em_rel_tol = 1e-6;
  // mars
  int mars_max_terms = 21;
  double mars_gcv_penalty = 3.0;
  // gbm
  int gbm_n_trees = 100;
  int gbm_max_depth = 3;
  double gbm_shrinkage = 0.1;
  // rf (mtry 0 = floor(sqrt(p)))
  int rf_n_trees = 200;
  int rf_mtry = 0;
  int rf_min_leaf = 5;

  void validate() const;
};

struct Prediction {
  int label = 0;
  double score = 0;  // in [0, 1]; label = 1 iff score >= 0.5
};

class SingleClassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularCovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual LearnerFamily family() const = 0;
  virtual double score_row(std::span<const double> row) const = 0;

  Prediction predict(std::span<const double> row) const;

  const std::vector<std::string>& ledger() const { return ledger_; }
  long training_rows() const { return training_rows_; }

  // Self-describing flat text serialization; load() restores a model whose
  // predictions are bit-identical to the original's.
  void save(std::ostream& out) const;
  static std::unique_ptr<TrainedModel> load(std::istream& in);

 protected:
  virtual void save_params(std::ostream& out) const = 0;

  std::vector<std::string> ledger_;
  long training_rows_ = 0;

  friend std::unique_ptr<TrainedModel> fit(const LearnerSpec&,
                                           const features::FeatureMatrix&);
  friend class ModelReader;
};

// Train a model of spec.family on the matrix. Requires a non-empty matrix
// with both classes present and finite features.
std::unique_ptr<TrainedModel> fit(const LearnerSpec& spec, const features::FeatureMatrix& matrix);

// Predict every row. Throws on a ledger mismatch between model and matrix.
std::vector<Prediction> predict_matrix(const TrainedModel& model,
                                       const features::FeatureMatrix& matrix);

void save_model(const TrainedModel& model, const std::string& path);
std::unique_ptr<TrainedModel> load_model(const std::string& path);

}  // namespace fleetpdm::learners
