// The 27-factor feature matrix: fast/slow rolling sensor statistics,
// trailing error counts, component replacement ages, machine metadata,
// and the binary failure-horizon label. Every feature of a row at time t
// depends only on events with timestamp <= t.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fleetpdm/dataset.hpp"

namespace fleetpdm::features {

struct FeatureConfig {
  int fast_lag_hours = 3;
  int slow_lag_hours = 24;
  int error_window_hours = 24;
  int label_horizon_hours = 24;
  int sampling_stride_hours = 3;

  void validate() const;  // fast < slow, all >= 1
};

enum class FeatureGroup { sensor_stats, error_counts, replacement_ages, metadata };

const char* feature_group_name(FeatureGroup g);
FeatureGroup feature_group(std::string_view feature_name);

// Fixed ledger order: per sensor (volt, rotate, pressure, vibration) the
// block mean_fast, sd_fast, mean_slow, sd_slow; then one error count per
// declared type; one replacement age per declared component; machine_age;
// model_code. 27 names for the default schema.
std::vector<std::string> ledger_names(const FleetSchema& schema);

struct FeatureRowData {
  int machine_id = 0;
  EpochHour timestamp = 0;
  std::vector<double> values;
  int label = 0;
};

struct FeatureMatrix {
  std::vector<std::string> ledger;
  std::vector<FeatureRowData> rows;

  std::size_t n_features() const { return ledger.size(); }
  long count_label(int label) const;
};

struct BuildReport {
  long rows_emitted = 0;
  long rows_dropped_insufficient_history = 0;
};

struct BuildResult {
  FeatureMatrix matrix;
  BuildReport report;
};

struct RollingStats {
  double mean = 0;
  double sd = 0;  // sample standard deviation; 0 for a single observation
};

// Mean and sample sd over observations in (t - window_hours, t]. Empty
// window (insufficient history) yields nullopt and the caller drops the row.
std::optional<RollingStats> rolling_stats(std::span<const EpochHour> times,
                                          std::span<const double> values, EpochHour t,
                                          int window_hours);

// Per-type counts of error events in (t - window_hours, t].
std::vector<long> error_counts(std::span<const EpochHour> error_times,
                               std::span<const int> error_types, int n_types, EpochHour t,
                               int window_hours);

// Days since the most recent replacement of each component at or before t;
// measured from `timeline_start` when a component has no prior replacement.
std::vector<double> days_since_replacement(std::span<const EpochHour> maint_times,
                                           std::span<const int> maint_components,
                                           int n_components, EpochHour t,
                                           EpochHour timeline_start);

// 1 iff a failure of the machine falls in (t, t + horizon_hours].
int label_row(std::span<const EpochHour> failure_times, EpochHour t, int horizon_hours);

BuildResult build_matrix(const FleetDataset& dataset, const FeatureConfig& config);

// CSV export: one '#' comment line documenting the %.6g value formatting,
// then header machine_id,datetime,<ledger...>,label.
void write_matrix_csv(const FeatureMatrix& matrix, const std::string& path);
FeatureMatrix read_matrix_csv(const std::string& path);

}  // namespace fleetpdm::features
