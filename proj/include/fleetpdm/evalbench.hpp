// Evaluation protocol: time-sliced splits that never leak the future into
// training, under-sampling to class balance, metric computation with
// explicit undefined markers, sequential wall-time measurement, and ranked
// result tables for algorithms and features.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fleetpdm/features.hpp"
#include "fleetpdm/learners/model.hpp"

namespace fleetpdm::evalbench {

struct SplitSpec {
  std::vector<double> train_fractions = {0.60, 0.70, 0.80};
  double balance_ratio = 1.0;  // majority rows per minority row
  bool balance_test = true;
  std::uint64_t seed = 42;
  int timing_repetitions = 3;

  void validate() const;  // fractions strictly in (0,1), ascending
};

struct Metrics {
  long tn = 0, fp = 0, fn = 0, tp = 0;

  long total() const { return tn + fp + fn + tp; }
  std::optional<double> accuracy() const;
  std::optional<double> recall() const;
  std::optional<double> precision() const;
  std::optional<double> f1() const;
};

Metrics compute_metrics(const std::vector<learners::Prediction>& predictions,
                        const std::vector<int>& labels);

struct SplitResult {
  features::FeatureMatrix train;
  features::FeatureMatrix test;
  // Set when either side is missing a class; such a slice is excluded
  // from medians rather than failing the run.
  bool degenerate = false;
};

// Split at the timestamp quantile for `fraction`: train takes every row
// with timestamp <= cut, test the rest, so max(train t) < min(test t).
SplitResult time_slice_split(const features::FeatureMatrix& matrix, double fraction);

// Keep all minority rows, sample majority rows without replacement down to
// ratio * minority count, re-sort by (timestamp, machine_id).
features::FeatureMatrix undersample(const features::FeatureMatrix& matrix, double ratio,
                                    std::uint64_t seed);

struct SliceOutcome {
  double fraction = 0;
  bool degenerate = false;
  Metrics metrics;
  double wall_seconds = 0;  // median fit+predict over the repetitions
  long train_rows = 0;
  long test_rows = 0;
};

struct LearnerResult {
  std::string name;
  std::vector<SliceOutcome> slices;
  int slices_used = 0;  // non-degenerate slice count behind the medians
  double median_accuracy = 0;
  double median_recall = 0;
  double median_precision = 0;
  double median_f1 = 0;
  double median_wall_seconds = 0;
  double relative_time = 0;  // median wall / fastest learner's median wall
};

struct BenchResult {
  SplitSpec split;
  bool balanced_test = false;
  std::vector<LearnerResult> learners;  // input order
};

// The full protocol: per fraction split -> undersample train (and test when
// balance_test) -> fit/predict each learner strictly sequentially, 3 timed
// repetitions, median repetition kept -> medians across non-degenerate
// slices -> relative time against the fastest learner.
BenchResult run_benchmark(const features::FeatureMatrix& matrix,
                          const std::vector<learners::LearnerSpec>& specs,
                          const SplitSpec& split);

struct ImportanceEntry {
  std::string feature;
  std::string group;
  double score = 0;
  int rank = 0;  // 1 = most important
};

struct ImportanceReport {
  double fraction_used = 0;
  std::vector<ImportanceEntry> entries;  // sorted by score desc, ties by ledger order
};

// Fit the random forest on the balanced train slice at the middle fraction
// and rank features by out-of-bag permutation importance.
ImportanceReport rank_features(const features::FeatureMatrix& matrix,
                               const learners::LearnerSpec& rf_spec, const SplitSpec& split);

double median(std::vector<double> values);  // empty input is an error

}  // namespace fleetpdm::evalbench
