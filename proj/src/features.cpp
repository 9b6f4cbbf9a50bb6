#include "fleetpdm/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "fleetpdm/csv.hpp"
#include "fleetpdm/parallel.hpp"

namespace fleetpdm::features {

void FeatureConfig::validate() const {
  if (fast_lag_hours < 1 || slow_lag_hours < 1 || error_window_hours < 1 ||
      label_horizon_hours < 1 || sampling_stride_hours < 1) {
    throw std::invalid_argument("feature config: all window counts must be >= 1");
  }
  if (!(fast_lag_hours < slow_lag_hours)) {
    throw std::invalid_argument("feature config: fast_lag must be < slow_lag");
  }
}

const char* feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::sensor_stats: return "sensor-stats";
    case FeatureGroup::error_counts: return "error-counts";
    case FeatureGroup::replacement_ages: return "replacement-ages";
    case FeatureGroup::metadata: return "metadata";
  }
  return "unknown";
}

FeatureGroup feature_group(std::string_view name) {
  if (name.starts_with("count_")) return FeatureGroup::error_counts;
  if (name.starts_with("days_since_replace_")) return FeatureGroup::replacement_ages;
  if (name == "machine_age" || name == "model_code") return FeatureGroup::metadata;
  return FeatureGroup::sensor_stats;
}

std::vector<std::string> ledger_names(const FleetSchema& schema) {
  std::vector<std::string> names;
  for (int s = 0; s < kNumSensors; ++s) {
    const std::string sensor = kSensorNames[s];
    names.push_back("mean_fast_" + sensor);
    names.push_back("sd_fast_" + sensor);
    names.push_back("mean_slow_" + sensor);
    names.push_back("sd_slow_" + sensor);
  }
  for (const auto& label : schema.error_labels) names.push_back("count_24h_" + label);
  for (const auto& label : schema.component_labels) names.push_back("days_since_replace_" + label);
  names.push_back("machine_age");
  names.push_back("model_code");
  return names;
}

long FeatureMatrix::count_label(int label) const {
  long n = 0;
  for (const auto& r : rows) n += r.label == label;
  return n;
}

std::optional<RollingStats> rolling_stats(std::span<const EpochHour> times,
                                          std::span<const double> values, EpochHour t,
                                          int window_hours) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("rolling_stats: times/values size mismatch");
  }
  if (window_hours < 1) throw std::invalid_argument("rolling_stats: window must be >= 1");
  // Observations in (t - window, t].
  auto lo = std::upper_bound(times.begin(), times.end(), t - window_hours);
  auto hi = std::upper_bound(times.begin(), times.end(), t);
  if (lo >= hi) return std::nullopt;
  std::size_t a = static_cast<std::size_t>(lo - times.begin());
  std::size_t b = static_cast<std::size_t>(hi - times.begin());
  double sum = 0;
  for (std::size_t i = a; i < b; ++i) sum += values[i];
  std::size_t n = b - a;
  double mean = sum / static_cast<double>(n);
  double sd = 0;
  if (n > 1) {
    double ss = 0;
    for (std::size_t i = a; i < b; ++i) {
      double d = values[i] - mean;
      ss += d * d;
    }
    sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return RollingStats{mean, sd};
}

std::vector<long> error_counts(std::span<const EpochHour> error_times,
                               std::span<const int> error_types, int n_types, EpochHour t,
                               int window_hours) {
  if (error_times.size() != error_types.size()) {
    throw std::invalid_argument("error_counts: times/types size mismatch");
  }
  std::vector<long> counts(static_cast<std::size_t>(n_types), 0);
  auto lo = std::upper_bound(error_times.begin(), error_times.end(), t - window_hours);
  auto hi = std::upper_bound(error_times.begin(), error_times.end(), t);
  for (auto it = lo; it < hi; ++it) {
    int type = error_types[static_cast<std::size_t>(it - error_times.begin())];
    if (type >= 0 && type < n_types) ++counts[type];
  }
  return counts;
}

std::vector<double> days_since_replacement(std::span<const EpochHour> maint_times,
                                           std::span<const int> maint_components,
                                           int n_components, EpochHour t,
                                           EpochHour timeline_start) {
  if (maint_times.size() != maint_components.size()) {
    throw std::invalid_argument("days_since_replacement: times/components size mismatch");
  }
  std::vector<EpochHour> last(static_cast<std::size_t>(n_components), timeline_start);
  auto hi = std::upper_bound(maint_times.begin(), maint_times.end(), t);
  for (auto it = maint_times.begin(); it < hi; ++it) {
    int c = maint_components[static_cast<std::size_t>(it - maint_times.begin())];
    if (c >= 0 && c < n_components) {
      last[c] = std::max(last[c], *it);
    }
  }
  std::vector<double> days(static_cast<std::size_t>(n_components));
  for (int c = 0; c < n_components; ++c) {
    days[c] = static_cast<double>(t - last[c]) / kHoursPerDay;
  }
  return days;
}

int label_row(std::span<const EpochHour> failure_times, EpochHour t, int horizon_hours) {
  auto it = std::upper_bound(failure_times.begin(), failure_times.end(), t);
  return (it != failure_times.end() && *it <= t + horizon_hours) ? 1 : 0;
}

namespace {

struct MachineSeries {
  const MachineRecord* machine = nullptr;
  std::vector<EpochHour> tel_times;
  std::vector<double> sensors[kNumSensors];
  std::vector<EpochHour> error_times;
  std::vector<int> error_types;
  std::vector<EpochHour> maint_times;
  std::vector<int> maint_components;
  std::vector<EpochHour> failure_times;
};

struct MachineRows {
  std::vector<FeatureRowData> rows;
  long dropped = 0;
};

MachineRows build_machine_rows(const MachineSeries& series, const FleetSchema& schema,
                               const FeatureConfig& cfg, EpochHour start, EpochHour end) {
  MachineRows out;
  const int n_types = schema.n_error_types();
  const int n_comps = schema.n_components();
  const std::size_t width = 4u * kNumSensors + static_cast<std::size_t>(n_types) +
                            static_cast<std::size_t>(n_comps) + 2u;

  // Window cursors; ticks ascend so every cursor only moves forward.
  std::size_t fast_lo = 0, fast_hi = 0, slow_lo = 0, slow_hi = 0;
  std::size_t err_lo = 0, err_hi = 0;
  std::size_t maint_cursor = 0;
  std::vector<EpochHour> last_replace(static_cast<std::size_t>(n_comps), start);

  for (EpochHour t = start; t <= end; t += cfg.sampling_stride_hours) {
    const auto& times = series.tel_times;
    while (fast_hi < times.size() && times[fast_hi] <= t) ++fast_hi;
    while (fast_lo < times.size() && times[fast_lo] <= t - cfg.fast_lag_hours) ++fast_lo;
    while (slow_hi < times.size() && times[slow_hi] <= t) ++slow_hi;
    while (slow_lo < times.size() && times[slow_lo] <= t - cfg.slow_lag_hours) ++slow_lo;
    while (err_hi < series.error_times.size() && series.error_times[err_hi] <= t) ++err_hi;
    while (err_lo < series.error_times.size() &&
           series.error_times[err_lo] <= t - cfg.error_window_hours) {
      ++err_lo;
    }
    while (maint_cursor < series.maint_times.size() && series.maint_times[maint_cursor] <= t) {
      int c = series.maint_components[maint_cursor];
      if (c >= 0 && c < n_comps) {
        last_replace[static_cast<std::size_t>(c)] =
            std::max(last_replace[static_cast<std::size_t>(c)], series.maint_times[maint_cursor]);
      }
      ++maint_cursor;
    }

    // Warm-up: both lag windows must be able to hold full history.
    if (t < start + cfg.slow_lag_hours || fast_lo >= fast_hi || slow_lo >= slow_hi) {
      ++out.dropped;
      continue;
    }

    FeatureRowData row;
    row.machine_id = series.machine->machine_id;
    row.timestamp = t;
    row.values.reserve(width);
    bool usable = true;
    for (int s = 0; s < kNumSensors && usable; ++s) {
      const auto& v = series.sensors[s];
      for (auto [lo, hi] : {std::pair<std::size_t, std::size_t>{fast_lo, fast_hi},
                            std::pair<std::size_t, std::size_t>{slow_lo, slow_hi}}) {
        double sum = 0;
        for (std::size_t i = lo; i < hi; ++i) sum += v[i];
        std::size_t n = hi - lo;
        double mean = sum / static_cast<double>(n);
        double sd = 0;
        if (n > 1) {
          double ss = 0;
          for (std::size_t i = lo; i < hi; ++i) {
            double d = v[i] - mean;
            ss += d * d;
          }
          sd = std::sqrt(ss / static_cast<double>(n - 1));
        }
        if (!std::isfinite(mean) || !std::isfinite(sd)) {
          usable = false;
          break;
        }
        row.values.push_back(mean);
        row.values.push_back(sd);
      }
    }
    if (!usable) {
      ++out.dropped;
      continue;
    }
    // Ledger order within a sensor block is mean_fast, sd_fast, mean_slow,
    // sd_slow; the loop above pushed fast(mean,sd) then slow(mean,sd).

    std::vector<long> counts(static_cast<std::size_t>(n_types), 0);
    for (std::size_t i = err_lo; i < err_hi; ++i) {
      int type = series.error_types[i];
      if (type >= 0 && type < n_types) ++counts[static_cast<std::size_t>(type)];
    }
    for (long c : counts) row.values.push_back(static_cast<double>(c));

    for (int c = 0; c < n_comps; ++c) {
      row.values.push_back(static_cast<double>(t - last_replace[static_cast<std::size_t>(c)]) /
                           kHoursPerDay);
    }

    row.values.push_back(static_cast<double>(series.machine->age_years));
    row.values.push_back(static_cast<double>(series.machine->model_index + 1));

    row.label = label_row(series.failure_times, t, cfg.label_horizon_hours);
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace

BuildResult build_matrix(const FleetDataset& dataset, const FeatureConfig& config) {
  config.validate();
  BuildResult result;
  result.matrix.ledger = ledger_names(dataset.schema);
  if (dataset.telemetry.empty()) return result;

  EpochHour start = dataset.telemetry.front().timestamp;
  EpochHour end = dataset.telemetry.back().timestamp;

  std::map<int, MachineSeries> by_machine;
  for (const auto& m : dataset.machines) by_machine[m.machine_id].machine = &m;
  for (const auto& r : dataset.telemetry) {
    auto& s = by_machine[r.machine_id];
    s.tel_times.push_back(r.timestamp);
    s.sensors[0].push_back(r.volt);
    s.sensors[1].push_back(r.rotate);
    s.sensors[2].push_back(r.pressure);
    s.sensors[3].push_back(r.vibration);
  }
  for (const auto& r : dataset.errors) {
    auto& s = by_machine[r.machine_id];
    s.error_times.push_back(r.timestamp);
    s.error_types.push_back(r.error_index);
  }
  for (const auto& r : dataset.maintenance) {
    auto& s = by_machine[r.machine_id];
    s.maint_times.push_back(r.timestamp);
    s.maint_components.push_back(r.component_index);
  }
  for (const auto& r : dataset.failures) {
    by_machine[r.machine_id].failure_times.push_back(r.timestamp);
  }

  std::vector<const MachineSeries*> series;
  for (const auto& [id, s] : by_machine) {
    if (s.machine != nullptr) series.push_back(&s);
  }
  std::vector<MachineRows> rows(series.size());
  parallel_for_index(series.size(), worker_count(), [&](std::size_t i) {
    rows[i] = build_machine_rows(*series[i], dataset.schema, config, start, end);
  });

  for (auto& r : rows) {
    result.report.rows_dropped_insufficient_history += r.dropped;
    for (auto& row : r.rows) result.matrix.rows.push_back(std::move(row));
  }
  std::stable_sort(result.matrix.rows.begin(), result.matrix.rows.end(),
                   [](const FeatureRowData& a, const FeatureRowData& b) {
                     return a.timestamp != b.timestamp ? a.timestamp < b.timestamp
                                                       : a.machine_id < b.machine_id;
                   });
  result.report.rows_emitted = static_cast<long>(result.matrix.rows.size());
  return result;
}

void write_matrix_csv(const FeatureMatrix& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write feature matrix: " + path);
  out << "# fleetpdm feature matrix; feature values are formatted with %.6g "
         "(6 significant digits)\n";
  out << "machine_id,datetime";
  for (const auto& name : matrix.ledger) out << ',' << name;
  out << ",label\n";
  char buf[40];
  for (const auto& row : matrix.rows) {
    out << row.machine_id << ',' << format_epoch_hour(row.timestamp);
    for (double v : row.values) {
      std::snprintf(buf, sizeof(buf), "%.6g", v);
      out << ',' << buf;
    }
    out << ',' << row.label << '\n';
  }
  if (!out) throw std::runtime_error("feature matrix write failed: " + path);
}

FeatureMatrix read_matrix_csv(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot read feature matrix: " + path);
  std::string header_line;
  std::size_t header_lineno = 0;
  while (std::getline(probe, header_line)) {
    ++header_lineno;
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    if (header_line.empty() || header_line[0] == '#') continue;
    break;
  }
  std::vector<std::string> header;
  split_csv_line(header_line, header);
  if (header.size() < 4 || header[0] != "machine_id" || header[1] != "datetime" ||
      header.back() != "label") {
    throw CsvError(path, header_lineno,
                   "feature matrix header must be machine_id,datetime,<features...>,label");
  }

  FeatureMatrix matrix;
  matrix.ledger.assign(header.begin() + 2, header.end() - 1);

  CsvReader reader(path, header);
  std::vector<std::string> f;
  while (reader.next_row(f)) {
    FeatureRowData row;
    long id = 0;
    if (!parse_long_field(f[0], id) || id <= 0) reader.fail("bad machine_id \"" + f[0] + "\"");
    row.machine_id = static_cast<int>(id);
    std::string err;
    auto ts = parse_epoch_hour(f[1], &err);
    if (!ts) reader.fail("bad datetime \"" + f[1] + "\": " + err);
    row.timestamp = *ts;
    row.values.reserve(matrix.ledger.size());
    for (std::size_t i = 0; i < matrix.ledger.size(); ++i) {
      double v = 0;
      if (!parse_double_field(f[2 + i], v) || !std::isfinite(v)) {
        reader.fail("bad value \"" + f[2 + i] + "\" for " + matrix.ledger[i]);
      }
      row.values.push_back(v);
    }
    long label = 0;
    if (!parse_long_field(f.back(), label) || (label != 0 && label != 1)) {
      reader.fail("bad label \"" + f.back() + "\"");
    }
    row.label = static_cast<int>(label);
    matrix.rows.push_back(std::move(row));
  }
  return matrix;
}

}  // namespace fleetpdm::features
