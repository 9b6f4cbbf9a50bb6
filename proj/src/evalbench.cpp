#include "fleetpdm/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fleetpdm/learners/random_forest.hpp"
#include "fleetpdm/rng.hpp"

namespace fleetpdm::evalbench {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

std::vector<int> labels_of(const features::FeatureMatrix& m) {
  std::vector<int> labels;
  labels.reserve(m.rows.size());
  for (const auto& r : m.rows) labels.push_back(r.label);
  return labels;
}

void sort_rows(features::FeatureMatrix& m) {
  std::stable_sort(m.rows.begin(), m.rows.end(),
                   [](const features::FeatureRowData& a, const features::FeatureRowData& b) {
                     return a.timestamp != b.timestamp ? a.timestamp < b.timestamp
                                                       : a.machine_id < b.machine_id;
                   });
}

bool has_both_classes(const features::FeatureMatrix& m) {
  bool seen[2] = {false, false};
  for (const auto& r : m.rows) {
    if (r.label == 0 || r.label == 1) seen[r.label] = true;
    if (seen[0] && seen[1]) return true;
  }
  return false;
}

// Median over the defined (non-NaN) entries; NaN when none are.
double median_defined(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return kUndefined;
  return median(std::move(values));
}

double value_or_nan(const std::optional<double>& v) { return v ? *v : kUndefined; }

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

void SplitSpec::validate() const {
  if (train_fractions.empty()) throw std::invalid_argument("split: no train fractions");
  double prev = 0;
  for (double f : train_fractions) {
    if (!(f > 0) || !(f < 1)) throw std::invalid_argument("split: fractions must lie in (0,1)");
    if (!(f > prev)) throw std::invalid_argument("split: fractions must be strictly ascending");
    prev = f;
  }
  if (!(balance_ratio > 0)) throw std::invalid_argument("split: balance ratio must be positive");
  if (timing_repetitions < 1) throw std::invalid_argument("split: repetitions must be >= 1");
}

std::optional<double> Metrics::accuracy() const {
  long n = total();
  if (n == 0) return std::nullopt;
  return static_cast<double>(tn + tp) / static_cast<double>(n);
}

std::optional<double> Metrics::recall() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> Metrics::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> Metrics::f1() const {
  auto p = precision();
  auto r = recall();
  if (!p || !r || *p + *r == 0) return std::nullopt;
  return 2.0 * (*p) * (*r) / (*p + *r);
}

Metrics compute_metrics(const std::vector<learners::Prediction>& predictions,
                        const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("compute_metrics: prediction/label length mismatch");
  }
  if (predictions.empty()) throw std::invalid_argument("compute_metrics: empty input");
  Metrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] == 1) {
      predictions[i].label == 1 ? ++m.tp : ++m.fn;
    } else {
      predictions[i].label == 1 ? ++m.fp : ++m.tn;
    }
  }
  return m;
}

SplitResult time_slice_split(const features::FeatureMatrix& matrix, double fraction) {
  if (!(fraction > 0) || !(fraction < 1)) {
    throw std::invalid_argument("time_slice_split: fraction must lie in (0,1)");
  }
  if (matrix.rows.empty()) throw std::invalid_argument("time_slice_split: empty matrix");

  const std::size_t n = matrix.rows.size();
  auto idx = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n))) - 1;
  if (idx >= n) idx = n - 1;
  const EpochHour cut = matrix.rows[idx].timestamp;

  SplitResult out;
  out.train.ledger = matrix.ledger;
  out.test.ledger = matrix.ledger;
  for (const auto& row : matrix.rows) {
    (row.timestamp <= cut ? out.train : out.test).rows.push_back(row);
  }
  out.degenerate = out.test.rows.empty() || !has_both_classes(out.train) ||
                   !has_both_classes(out.test);
  return out;
}

features::FeatureMatrix undersample(const features::FeatureMatrix& matrix, double ratio,
                                    std::uint64_t seed) {
  std::vector<std::size_t> by_label[2];
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    int label = matrix.rows[i].label;
    by_label[label == 1 ? 1 : 0].push_back(i);
  }
  if (by_label[0].empty() || by_label[1].empty()) {
    throw std::invalid_argument("undersample: both classes must be present");
  }
  int minority = by_label[1].size() <= by_label[0].size() ? 1 : 0;
  const auto& min_rows = by_label[minority];
  const auto& maj_rows = by_label[1 - minority];

  auto target = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(min_rows.size())));

  features::FeatureMatrix out;
  out.ledger = matrix.ledger;
  out.rows.reserve(min_rows.size() + std::min(target, maj_rows.size()));
  for (std::size_t i : min_rows) out.rows.push_back(matrix.rows[i]);
  if (target >= maj_rows.size()) {
    for (std::size_t i : maj_rows) out.rows.push_back(matrix.rows[i]);
  } else {
    Rng rng(seed);
    auto picks = rng.sample_without_replacement(maj_rows.size(), target);
    for (std::size_t k : picks) out.rows.push_back(matrix.rows[maj_rows[k]]);
  }
  sort_rows(out);
  return out;
}

BenchResult run_benchmark(const features::FeatureMatrix& matrix,
                          const std::vector<learners::LearnerSpec>& specs,
                          const SplitSpec& split) {
  split.validate();
  if (specs.empty()) throw std::invalid_argument("run_benchmark: no learners");
  if (!has_both_classes(matrix)) {
    throw std::invalid_argument("run_benchmark: matrix must contain both classes");
  }

  BenchResult result;
  result.split = split;
  result.balanced_test = split.balance_test;
  result.learners.resize(specs.size());
  for (std::size_t l = 0; l < specs.size(); ++l) {
    result.learners[l].name = learners::family_name(specs[l].family);
  }

  using clock = std::chrono::steady_clock;
  for (std::size_t fi = 0; fi < split.train_fractions.size(); ++fi) {
    const double fraction = split.train_fractions[fi];
    SplitResult sliced = time_slice_split(matrix, fraction);
    if (sliced.degenerate) {
      for (auto& lr : result.learners) {
        SliceOutcome o;
        o.fraction = fraction;
        o.degenerate = true;
        lr.slices.push_back(o);
      }
      continue;
    }

    auto train = undersample(sliced.train, split.balance_ratio,
                             substream_seed(split.seed, "undersample.train", fi));
    auto test = split.balance_test
                    ? undersample(sliced.test, split.balance_ratio,
                                  substream_seed(split.seed, "undersample.test", fi))
                    : std::move(sliced.test);
    const auto test_labels = labels_of(test);

    // Learners run strictly sequentially; each timing repetition covers one
    // full fit plus the predictions over the test slice.
    for (std::size_t l = 0; l < specs.size(); ++l) {
      std::vector<double> walls;
      std::vector<learners::Prediction> preds;
      walls.reserve(static_cast<std::size_t>(split.timing_repetitions));
      for (int rep = 0; rep < split.timing_repetitions; ++rep) {
        auto t0 = clock::now();
        auto model = learners::fit(specs[l], train);
        preds = learners::predict_matrix(*model, test);
        auto t1 = clock::now();
        walls.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      SliceOutcome o;
      o.fraction = fraction;
      o.metrics = compute_metrics(preds, test_labels);
      o.wall_seconds = median(walls);
      o.train_rows = static_cast<long>(train.rows.size());
      o.test_rows = static_cast<long>(test.rows.size());
      result.learners[l].slices.push_back(o);
    }
  }

  bool any_usable = false;
  for (auto& lr : result.learners) {
    std::vector<double> acc, rec, prec, f1, wall;
    for (const auto& s : lr.slices) {
      if (s.degenerate) continue;
      acc.push_back(value_or_nan(s.metrics.accuracy()));
      rec.push_back(value_or_nan(s.metrics.recall()));
      prec.push_back(value_or_nan(s.metrics.precision()));
      f1.push_back(value_or_nan(s.metrics.f1()));
      wall.push_back(s.wall_seconds);
    }
    lr.slices_used = static_cast<int>(wall.size());
    if (wall.empty()) continue;
    any_usable = true;
    lr.median_accuracy = median_defined(acc);
    lr.median_recall = median_defined(rec);
    lr.median_precision = median_defined(prec);
    lr.median_f1 = median_defined(f1);
    lr.median_wall_seconds = median(wall);
  }
  if (!any_usable) {
    throw std::runtime_error("run_benchmark: every time slice was degenerate");
  }

  double fastest = std::numeric_limits<double>::infinity();
  for (const auto& lr : result.learners) {
    if (lr.slices_used > 0) fastest = std::min(fastest, lr.median_wall_seconds);
  }
  for (auto& lr : result.learners) {
    if (lr.slices_used > 0 && fastest > 0) {
      lr.relative_time = lr.median_wall_seconds / fastest;
    }
  }
  return result;
}

ImportanceReport rank_features(const features::FeatureMatrix& matrix,
                               const learners::LearnerSpec& rf_spec, const SplitSpec& split) {
  split.validate();
  if (rf_spec.family != learners::LearnerFamily::rf) {
    throw std::invalid_argument("rank_features: spec must be a random forest");
  }
  const std::size_t middle = (split.train_fractions.size() - 1) / 2;
  const double fraction = split.train_fractions[middle];
  SplitResult sliced = time_slice_split(matrix, fraction);
  if (sliced.degenerate) {
    throw std::runtime_error("rank_features: the middle time slice is degenerate");
  }
  auto train = undersample(sliced.train, split.balance_ratio,
                           substream_seed(split.seed, "undersample.train", middle));
  auto model = learners::fit(rf_spec, train);
  auto scores = learners::oob_permutation_importance(*model, train);

  ImportanceReport report;
  report.fraction_used = fraction;
  report.entries.reserve(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    ImportanceEntry e;
    e.feature = matrix.ledger[j];
    e.group = features::feature_group_name(features::feature_group(e.feature));
    e.score = scores[j];
    report.entries.push_back(std::move(e));
  }
  // Stable sort keeps ledger order for tied scores.
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) {
                     return a.score > b.score;
                   });
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    report.entries[i].rank = static_cast<int>(i) + 1;
  }
  return report;
}

}  // namespace fleetpdm::evalbench
