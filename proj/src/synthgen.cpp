#include "fleetpdm/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "fleetpdm/parallel.hpp"
#include "fleetpdm/rng.hpp"

namespace fleetpdm::synthgen {

const char* const kTelemetryFile = "telemetry.csv";
const char* const kErrorsFile = "errors.csv";
const char* const kMaintenanceFile = "maint.csv";
const char* const kFailuresFile = "failures.csv";
const char* const kMachinesFile = "machines.csv";
const char* const kManifestFile = "manifest.txt";

namespace {

// Sensor order: volt (V), rotate (RPM), pressure (PSI), vibration (mm/s).
constexpr double kBaseline[kNumSensors] = {170.0, 450.0, 100.0, 40.0};
constexpr double kNoiseSd[kNumSensors] = {15.0, 50.0, 10.0, 5.0};
// Per-machine offsets so fleets are heterogeneous: one step per model
// category and a slow drift with age, both well under the noise floor.
constexpr double kModelStep[kNumSensors] = {0.6, 2.0, 0.4, 0.2};
constexpr double kAgeSlope[kNumSensors] = {0.02, -0.15, 0.01, 0.04};
// Degradation signature inside the lead window. The rotation mean moves by
// two baseline standard deviations (the documented >= 1.5 sd shift); its
// direction depends on the failing component (over-speed vs under-speed),
// the other sensors drift weakly upward and every sensor gets noisier.
// After a replacement the mean shifts decay back to baseline over a day.
constexpr double kLeadShiftSd[kNumSensors] = {0.22, 1.9, 0.22, 0.25};
constexpr double kLeadNoiseMult = 1.12;
constexpr int kRecoveryTailHours = 24;
// Error process: Poisson stream whose intensity is multiplied inside a
// lead window, plus two injected precursors per failure so the trailing
// burst exists for every single failure (a pure Poisson burst would miss
// some): one of the last declared type 23 hours ahead (the fleet-wide
// failure signature) and one cycling over the remaining types 19 hours
// ahead. The baseline intensity gives back half of the expected lead load
// so the fleet-level error rate stays on the configured target.
constexpr double kLeadErrorMult = 5.0;
constexpr int kSignatureOffset = 23;
constexpr int kSecondaryOffset = 23;
constexpr int kMaxMachineAgeYears = 20;

// The k-th failure of a machine deals its secondary precursor type by
// cycling over the non-signature types, staggered by machine id so the
// deal stays even fleet-wide and across any time slice.
int secondary_error_type(int machine_id, int failure_index, int n_error_types) {
  int cycle = std::max(n_error_types - 1, 1);
  return (machine_id + failure_index) % cycle;
}

double baseline_error_intensity(const FleetConfig& cfg) {
  double lead_load_per_failure =
      2.0 + cfg.degradation_lead_hours * (kLeadErrorMult - 1.0) * cfg.error_rate_target;
  double reserve = 0.5 * cfg.failure_rate_target * lead_load_per_failure;
  return std::max(cfg.error_rate_target - reserve, 0.5 * cfg.error_rate_target);
}

double rotate_direction(int component) { return component % 2 == 0 ? -1.0 : 1.0; }

double quantize4(double x) { return static_cast<double>(std::llround(x * 1e4)) / 1e4; }

struct MachineStreams {
  MachineRecord machine;
  std::vector<TelemetryRecord> telemetry;
  std::vector<ErrorRecord> errors;
  std::vector<MaintenanceRecord> maintenance;
  std::vector<FailureRecord> failures;
};

struct ScheduledVisit {
  int hour;
  int component;
};

// Scheduled visits cycle through the components, one per visit, with a
// per-machine phase so the fleet's maintenance is staggered.
std::vector<ScheduledVisit> scheduled_visits(const FleetConfig& cfg, int machine_id) {
  std::vector<ScheduledVisit> visits;
  const long interval = static_cast<long>(cfg.scheduled_maint_interval_days) * kHoursPerDay;
  if (interval <= 0 || cfg.n_components <= 0) return visits;
  const long phase = (static_cast<long>(machine_id - 1) * kHoursPerDay) % interval;
  long hour = interval + phase;
  int visit = 0;
  while (hour < cfg.horizon_hours) {
    visits.push_back({static_cast<int>(hour), visit % cfg.n_components});
    ++visit;
    hour += interval;
  }
  return visits;
}

MachineStreams generate_machine(const FleetConfig& cfg, int machine_id) {
  MachineStreams out;
  Rng meta_rng(substream_seed(cfg.seed, "machine.meta", machine_id));
  out.machine.machine_id = machine_id;
  out.machine.age_years = static_cast<int>(meta_rng.uniform_below(kMaxMachineAgeYears + 1));
  out.machine.model_index = static_cast<int>(meta_rng.uniform_below(cfg.n_models));

  const EpochHour start = fleet_epoch_start();
  const int horizon = cfg.horizon_hours;
  const auto visits = scheduled_visits(cfg, machine_id);

  // Failure schedule: per component, exponential waiting times at the
  // component share of the fleet rate, censored by scheduled replacements.
  // Censoring an exponential clock does not change its event rate, so the
  // fleet-level frequency matches failure_rate_target exactly.
  struct Failure {
    int hour;
    int component;
  };
  std::vector<Failure> failures;
  const double comp_rate = cfg.failure_rate_target / cfg.n_components;
  for (int c = 0; c < cfg.n_components; ++c) {
    Rng hazard(substream_seed(cfg.seed, "machine.hazard", machine_id, c));
    double cycle_start = 0.0;
    std::size_t visit_cursor = 0;
    while (cycle_start < horizon) {
      double fail_time = cycle_start + hazard.exponential(comp_rate);
      while (visit_cursor < visits.size() &&
             (visits[visit_cursor].component != c ||
              visits[visit_cursor].hour <= cycle_start)) {
        ++visit_cursor;
      }
      double next_sched = visit_cursor < visits.size()
                              ? static_cast<double>(visits[visit_cursor].hour)
                              : std::numeric_limits<double>::infinity();
      if (next_sched < fail_time) {
        cycle_start = next_sched;  // replaced on schedule, redraw the clock
        continue;
      }
      int hour = static_cast<int>(std::ceil(fail_time));
      if (hour > horizon - 1) break;
      failures.push_back({hour, c});
      cycle_start = hour;
      // visit_cursor intentionally not rewound; visits before `hour` are spent.
    }
  }
  std::sort(failures.begin(), failures.end(), [](const Failure& a, const Failure& b) {
    return a.hour != b.hour ? a.hour < b.hour : a.component < b.component;
  });

  // Lead-window mask (with the component whose failure is impending; the
  // earliest failure claims overlapping hours), post-replacement recovery
  // tails, and the injected precursors.
  const auto h_size = static_cast<std::size_t>(std::max(horizon, 0));
  std::vector<int> lead_comp(h_size, -1);
  std::vector<int> tail_comp(h_size, -1);
  std::vector<double> tail_scale(h_size, 0.0);
  std::map<int, std::vector<int>> injected;  // hour -> error type indices
  for (std::size_t fi = 0; fi < failures.size(); ++fi) {
    const auto& f = failures[fi];
    int lead_start = std::max(0, f.hour - cfg.degradation_lead_hours);
    for (int h = lead_start; h < f.hour; ++h) {
      if (lead_comp[h] < 0) lead_comp[h] = f.component;
    }
    for (int h = f.hour; h < std::min(horizon, f.hour + kRecoveryTailHours); ++h) {
      tail_comp[h] = f.component;
      tail_scale[h] = static_cast<double>(kRecoveryTailHours - (h - f.hour)) / kRecoveryTailHours;
    }
    injected[std::max(0, f.hour - kSignatureOffset)].push_back(cfg.n_error_types - 1);
    injected[std::max(0, f.hour - kSecondaryOffset)].push_back(
        secondary_error_type(machine_id, static_cast<int>(fi), cfg.n_error_types));
  }

  // Maintenance: every failure is an unscheduled replacement at the same
  // stamp; scheduled visits add their component unless it failed that hour.
  for (const auto& f : failures) {
    out.failures.push_back({start + f.hour, machine_id, f.component});
    out.maintenance.push_back({start + f.hour, machine_id, f.component});
  }
  for (const auto& v : visits) {
    bool shadowed = false;
    for (const auto& f : failures) {
      if (f.hour == v.hour && f.component == v.component) {
        shadowed = true;
        break;
      }
    }
    if (!shadowed) out.maintenance.push_back({start + v.hour, machine_id, v.component});
  }
  std::sort(out.maintenance.begin(), out.maintenance.end(),
            [](const MaintenanceRecord& a, const MaintenanceRecord& b) {
              return a.timestamp != b.timestamp ? a.timestamp < b.timestamp
                                                : a.component_index < b.component_index;
            });

  // Telemetry: hourly Gaussian sensors around per-machine baselines, with
  // the degradation signature applied across lead windows.
  Rng noise(substream_seed(cfg.seed, "machine.noise", machine_id));
  double mean_base[kNumSensors];
  for (int s = 0; s < kNumSensors; ++s) {
    mean_base[s] = kBaseline[s] +
                   kModelStep[s] * (out.machine.model_index + 1 - 0.5 * (cfg.n_models + 1)) +
                   kAgeSlope[s] * out.machine.age_years;
  }
  out.telemetry.reserve(h_size);
  for (int h = 0; h < horizon; ++h) {
    const bool lead = lead_comp[h] >= 0;
    double shift_scale = 0.0;
    int shift_for = -1;
    if (lead) {
      shift_scale = 1.0;
      shift_for = lead_comp[h];
    } else if (tail_comp[h] >= 0) {
      shift_scale = tail_scale[h];
      shift_for = tail_comp[h];
    }
    double v[kNumSensors];
    for (int s = 0; s < kNumSensors; ++s) {
      double direction = s == 1 ? rotate_direction(shift_for) : 1.0;
      double mean = mean_base[s] + shift_scale * direction * kLeadShiftSd[s] * kNoiseSd[s];
      double sd = kNoiseSd[s] * (lead ? kLeadNoiseMult : 1.0);
      v[s] = quantize4(noise.normal(mean, sd));
    }
    out.telemetry.push_back({start + h, machine_id, v[0], v[1], v[2], v[3]});
  }

  // Errors: Poisson stream (uniform over the declared types) with the lead
  // multiplier; injected precursors close each hour.
  Rng events(substream_seed(cfg.seed, "machine.events", machine_id));
  const double base_intensity = baseline_error_intensity(cfg);
  for (int h = 0; h < horizon; ++h) {
    double intensity = base_intensity * (lead_comp[h] >= 0 ? kLeadErrorMult : 1.0);
    long n = events.poisson(intensity);
    for (long i = 0; i < n; ++i) {
      int type = static_cast<int>(events.uniform_below(cfg.n_error_types));
      out.errors.push_back({start + h, machine_id, type});
    }
    if (auto it = injected.find(h); it != injected.end()) {
      for (int type : it->second) out.errors.push_back({start + h, machine_id, type});
    }
  }
  return out;
}

void sort_dataset(FleetDataset& d) {
  auto by_time_machine = [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.machine_id < b.machine_id;
  };
  std::stable_sort(d.telemetry.begin(), d.telemetry.end(), by_time_machine);
  std::stable_sort(d.errors.begin(), d.errors.end(), by_time_machine);
  std::stable_sort(d.maintenance.begin(), d.maintenance.end(), by_time_machine);
  std::stable_sort(d.failures.begin(), d.failures.end(), by_time_machine);
}

void write_csv_header(std::ofstream& out, const char* header) { out << header << '\n'; }

std::string format4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

}  // namespace

void FleetConfig::validate() const {
  if (n_machines < 0 || horizon_hours < 0 || n_components < 0 || n_error_types < 0 ||
      n_models < 0 || scheduled_maint_interval_days < 0) {
    throw std::invalid_argument("fleet config: counts must be non-negative");
  }
  if (n_machines > 0) {
    if (n_components < 1 || n_error_types < 1 || n_models < 1) {
      throw std::invalid_argument("fleet config: component/error/model counts must be >= 1");
    }
  }
  if (!(failure_rate_target > 0) || !(failure_rate_target <= error_rate_target) ||
      !(error_rate_target < 1)) {
    throw std::invalid_argument(
        "fleet config: rates must satisfy 0 < failure_rate <= error_rate < 1");
  }
  if (degradation_lead_hours < 24) {
    throw std::invalid_argument("fleet config: degradation_lead_hours must be >= 24");
  }
}

FleetDataset generate_fleet(const FleetConfig& config) {
  config.validate();
  FleetDataset dataset;
  dataset.schema =
      FleetSchema::with_counts(config.n_components, config.n_error_types, config.n_models);
  if (config.n_machines == 0) return dataset;

  std::vector<MachineStreams> streams(static_cast<std::size_t>(config.n_machines));
  parallel_for_index(streams.size(), worker_count(), [&](std::size_t i) {
    streams[i] = generate_machine(config, static_cast<int>(i) + 1);
  });

  for (auto& s : streams) {
    dataset.machines.push_back(s.machine);
    dataset.telemetry.insert(dataset.telemetry.end(), s.telemetry.begin(), s.telemetry.end());
    dataset.errors.insert(dataset.errors.end(), s.errors.begin(), s.errors.end());
    dataset.maintenance.insert(dataset.maintenance.end(), s.maintenance.begin(),
                               s.maintenance.end());
    dataset.failures.insert(dataset.failures.end(), s.failures.begin(), s.failures.end());
  }
  sort_dataset(dataset);
  return dataset;
}

GenerationStats summarize(const FleetDataset& dataset, const FleetConfig& config) {
  GenerationStats s;
  s.telemetry_rows = static_cast<long>(dataset.telemetry.size());
  s.error_rows = static_cast<long>(dataset.errors.size());
  s.maintenance_rows = static_cast<long>(dataset.maintenance.size());
  s.failure_rows = static_cast<long>(dataset.failures.size());
  s.machine_rows = static_cast<long>(dataset.machines.size());
  s.machine_hours = static_cast<double>(config.n_machines) * config.horizon_hours;
  if (s.machine_hours > 0) {
    s.empirical_failure_rate = s.failure_rows / s.machine_hours;
    s.empirical_error_rate = s.error_rows / s.machine_hours;
  }
  s.empty = s.telemetry_rows == 0;
  return s;
}

Manifest write_fleet(const FleetDataset& dataset, const FleetConfig& config,
                     const std::string& directory, bool overwrite) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const char* names[5] = {kTelemetryFile, kErrorsFile, kMaintenanceFile, kFailuresFile,
                          kMachinesFile};
  if (!overwrite) {
    for (const char* name : names) {
      if (fs::exists(fs::path(directory) / name)) {
        throw std::runtime_error("refusing to overwrite " + (fs::path(directory) / name).string() +
                                 " (pass the overwrite flag to replace it)");
      }
    }
  }

  auto open = [&](const char* name) {
    std::ofstream out(fs::path(directory) / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name);
    return out;
  };

  {
    auto out = open(kTelemetryFile);
    write_csv_header(out, "datetime,machineID,volt,rotate,pressure,vibration");
    for (const auto& r : dataset.telemetry) {
      out << format_epoch_hour(r.timestamp) << ',' << r.machine_id << ',' << format4(r.volt)
          << ',' << format4(r.rotate) << ',' << format4(r.pressure) << ','
          << format4(r.vibration) << '\n';
    }
  }
  {
    auto out = open(kErrorsFile);
    write_csv_header(out, "datetime,machineID,errorID");
    for (const auto& r : dataset.errors) {
      out << format_epoch_hour(r.timestamp) << ',' << r.machine_id << ','
          << dataset.schema.error_labels.at(r.error_index) << '\n';
    }
  }
  {
    auto out = open(kMaintenanceFile);
    write_csv_header(out, "datetime,machineID,comp");
    for (const auto& r : dataset.maintenance) {
      out << format_epoch_hour(r.timestamp) << ',' << r.machine_id << ','
          << dataset.schema.component_labels.at(r.component_index) << '\n';
    }
  }
  {
    auto out = open(kFailuresFile);
    write_csv_header(out, "datetime,machineID,failure");
    for (const auto& r : dataset.failures) {
      out << format_epoch_hour(r.timestamp) << ',' << r.machine_id << ','
          << dataset.schema.component_labels.at(r.component_index) << '\n';
    }
  }
  {
    auto out = open(kMachinesFile);
    write_csv_header(out, "machineID,model,age");
    for (const auto& r : dataset.machines) {
      out << r.machine_id << ',' << dataset.schema.model_labels.at(r.model_index) << ','
          << r.age_years << '\n';
    }
  }

  GenerationStats stats = summarize(dataset, config);
  Manifest m;
  m.set("generator", "fleetpdm.synthgen");
  m.set("seed", config.seed);
  m.set("config.n_machines", config.n_machines);
  m.set("config.horizon_hours", config.horizon_hours);
  m.set("config.n_components", config.n_components);
  m.set("config.n_error_types", config.n_error_types);
  m.set("config.n_models", config.n_models);
  m.set("config.failure_rate_target", config.failure_rate_target);
  m.set("config.error_rate_target", config.error_rate_target);
  m.set("config.scheduled_maint_interval_days", config.scheduled_maint_interval_days);
  m.set("config.degradation_lead_hours", config.degradation_lead_hours);
  m.set("rows.telemetry", stats.telemetry_rows);
  m.set("rows.errors", stats.error_rows);
  m.set("rows.maintenance", stats.maintenance_rows);
  m.set("rows.failures", stats.failure_rows);
  m.set("rows.machines", stats.machine_rows);
  m.set("machine_hours", stats.machine_hours);
  m.set("empirical_failure_rate", stats.empirical_failure_rate);
  m.set("empirical_error_rate", stats.empirical_error_rate);
  m.set("empty_output", stats.empty);
  for (const char* name : names) {
    m.set(std::string("checksum.") + name, file_checksum_hex((fs::path(directory) / name).string()));
  }
  m.write((fs::path(directory) / kManifestFile).string());
  return m;
}

}  // namespace fleetpdm::synthgen
