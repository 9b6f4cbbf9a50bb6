#include "fleetpdm/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <unordered_set>

#include "fleetpdm/csv.hpp"
#include "fleetpdm/synthgen.hpp"

namespace fleetpdm::ingest {

namespace {

// Either throws (strict) or records the bad row and returns false.
bool reject(const CsvReader& reader, const ParseOptions& options, const std::string& why) {
  if (options.strict) reader.fail(why);
  if (options.report) {
    ++options.report->rows_skipped;
    options.report->skipped.push_back(reader.path() + ":" + std::to_string(reader.line()) + ": " +
                                      why);
  }
  return false;
}

void count_accepted(const ParseOptions& options) {
  if (options.report) ++options.report->rows_accepted;
}

bool parse_timestamp_field(const CsvReader& reader, const ParseOptions& options,
                           const std::string& text, EpochHour& out) {
  std::string error;
  auto h = parse_epoch_hour(text, &error);
  if (!h) return reject(reader, options, "datetime \"" + text + "\": " + error);
  out = *h;
  return true;
}

bool parse_machine_field(const CsvReader& reader, const ParseOptions& options,
                         const std::string& text, int& out) {
  long id = 0;
  if (!parse_long_field(text, id) || id <= 0) {
    return reject(reader, options, "machineID \"" + text + "\" is not a positive integer");
  }
  out = static_cast<int>(id);
  return true;
}

bool parse_label_field(const CsvReader& reader, const ParseOptions& options,
                       const std::vector<std::string>& labels, const char* column,
                       const std::string& text, int& out) {
  int idx = FleetSchema::index_of(labels, text);
  if (idx < 0) {
    return reject(reader, options,
                  std::string(column) + " \"" + text + "\" is not a declared label");
  }
  out = idx;
  return true;
}

bool parse_sensor_field(const CsvReader& reader, const ParseOptions& options, const char* column,
                        const std::string& text, double& out) {
  if (!parse_double_field(text, out) || !std::isfinite(out)) {
    return reject(reader, options, std::string(column) + " \"" + text + "\" is not a finite number");
  }
  return true;
}

}  // namespace

std::vector<std::string> telemetry_header() {
  return {"datetime", "machineID", "volt", "rotate", "pressure", "vibration"};
}
std::vector<std::string> errors_header() { return {"datetime", "machineID", "errorID"}; }
std::vector<std::string> maintenance_header() { return {"datetime", "machineID", "comp"}; }
std::vector<std::string> failures_header() { return {"datetime", "machineID", "failure"}; }
std::vector<std::string> machines_header() { return {"machineID", "model", "age"}; }

std::vector<MachineRecord> parse_machines(const std::string& path, const FleetSchema& schema,
                                          const ParseOptions& options) {
  CsvReader reader(path, machines_header());
  std::vector<MachineRecord> out;
  std::vector<std::string> f;
  while (reader.next_row(f)) {
    MachineRecord r;
    if (!parse_machine_field(reader, options, f[0], r.machine_id)) continue;
    if (!parse_label_field(reader, options, schema.model_labels, "model", f[1], r.model_index))
      continue;
    long age = 0;
    if (!parse_long_field(f[2], age) || age < 0) {
      reject(reader, options, "age \"" + f[2] + "\" is not a non-negative integer");
      continue;
    }
    r.age_years = static_cast<int>(age);
    out.push_back(r);
    count_accepted(options);
  }
  return out;
}

std::vector<TelemetryRecord> parse_telemetry(const std::string& path,
                                             const ParseOptions& options) {
  CsvReader reader(path, telemetry_header());
  std::vector<TelemetryRecord> out;
  std::vector<std::string> f;
  while (reader.next_row(f)) {
    TelemetryRecord r;
    if (!parse_timestamp_field(reader, options, f[0], r.timestamp)) continue;
    if (!parse_machine_field(reader, options, f[1], r.machine_id)) continue;
    if (!parse_sensor_field(reader, options, "volt", f[2], r.volt)) continue;
    if (!parse_sensor_field(reader, options, "rotate", f[3], r.rotate)) continue;
    if (!parse_sensor_field(reader, options, "pressure", f[4], r.pressure)) continue;
    if (!parse_sensor_field(reader, options, "vibration", f[5], r.vibration)) continue;
    out.push_back(r);
    count_accepted(options);
  }
  return out;
}

std::vector<ErrorRecord> parse_errors(const std::string& path, const FleetSchema& schema,
                                      const ParseOptions& options) {
  CsvReader reader(path, errors_header());
  std::vector<ErrorRecord> out;
  std::vector<std::string> f;
  while (reader.next_row(f)) {
    ErrorRecord r;
    if (!parse_timestamp_field(reader, options, f[0], r.timestamp)) continue;
    if (!parse_machine_field(reader, options, f[1], r.machine_id)) continue;
    if (!parse_label_field(reader, options, schema.error_labels, "errorID", f[2], r.error_index))
      continue;
    out.push_back(r);
    count_accepted(options);
  }
  return out;
}

std::vector<MaintenanceRecord> parse_maintenance(const std::string& path,
                                                 const FleetSchema& schema,
                                                 const ParseOptions& options) {
  CsvReader reader(path, maintenance_header());
  std::vector<MaintenanceRecord> out;
  std::vector<std::string> f;
  while (reader.next_row(f)) {
    MaintenanceRecord r;
    if (!parse_timestamp_field(reader, options, f[0], r.timestamp)) continue;
    if (!parse_machine_field(reader, options, f[1], r.machine_id)) continue;
    if (!parse_label_field(reader, options, schema.component_labels, "comp", f[2],
                           r.component_index))
      continue;
    out.push_back(r);
    count_accepted(options);
  }
  return out;
}

std::vector<FailureRecord> parse_failures(const std::string& path, const FleetSchema& schema,
                                          const ParseOptions& options) {
  CsvReader reader(path, failures_header());
  std::vector<FailureRecord> out;
  std::vector<std::string> f;
  while (reader.next_row(f)) {
    FailureRecord r;
    if (!parse_timestamp_field(reader, options, f[0], r.timestamp)) continue;
    if (!parse_machine_field(reader, options, f[1], r.machine_id)) continue;
    if (!parse_label_field(reader, options, schema.component_labels, "failure", f[2],
                           r.component_index))
      continue;
    out.push_back(r);
    count_accepted(options);
  }
  return out;
}

FleetDataset assemble(const FleetSchema& schema, std::vector<MachineRecord> machines,
                      std::vector<TelemetryRecord> telemetry, std::vector<ErrorRecord> errors,
                      std::vector<MaintenanceRecord> maintenance,
                      std::vector<FailureRecord> failures) {
  std::unordered_set<int> ids;
  for (const auto& m : machines) {
    if (!ids.insert(m.machine_id).second) {
      throw std::runtime_error("assemble: duplicate machine_id " + std::to_string(m.machine_id) +
                               " in machines stream");
    }
  }

  auto check_reference = [&](int machine_id, const char* stream) {
    if (!ids.count(machine_id)) {
      throw std::runtime_error("assemble: " + std::string(stream) + " references machine_id " +
                               std::to_string(machine_id) + " absent from machines");
    }
  };
  for (const auto& r : telemetry) check_reference(r.machine_id, "telemetry");
  for (const auto& r : errors) check_reference(r.machine_id, "errors");
  for (const auto& r : maintenance) check_reference(r.machine_id, "maintenance");
  for (const auto& r : failures) check_reference(r.machine_id, "failures");

  std::sort(machines.begin(), machines.end(),
            [](const MachineRecord& a, const MachineRecord& b) {
              return a.machine_id < b.machine_id;
            });
  auto by_time_machine = [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.machine_id < b.machine_id;
  };
  std::stable_sort(telemetry.begin(), telemetry.end(), by_time_machine);
  std::stable_sort(errors.begin(), errors.end(), by_time_machine);
  std::stable_sort(maintenance.begin(), maintenance.end(), by_time_machine);
  std::stable_sort(failures.begin(), failures.end(), by_time_machine);

  for (std::size_t i = 1; i < telemetry.size(); ++i) {
    if (telemetry[i].timestamp == telemetry[i - 1].timestamp &&
        telemetry[i].machine_id == telemetry[i - 1].machine_id) {
      throw std::runtime_error("assemble: duplicate telemetry key (machine " +
                               std::to_string(telemetry[i].machine_id) + ", " +
                               format_epoch_hour(telemetry[i].timestamp) + ")");
    }
  }

  FleetDataset d;
  d.schema = schema;
  d.machines = std::move(machines);
  d.telemetry = std::move(telemetry);
  d.errors = std::move(errors);
  d.maintenance = std::move(maintenance);
  d.failures = std::move(failures);
  return d;
}

FleetDataset load_directory(const std::string& directory, const FleetSchema& schema,
                            const ParseOptions& options) {
  namespace fs = std::filesystem;
  auto path_of = [&](const char* name) {
    fs::path p = fs::path(directory) / name;
    if (!fs::exists(p)) {
      throw std::runtime_error("missing input file: " + p.string());
    }
    return p.string();
  };
  auto machines = parse_machines(path_of(synthgen::kMachinesFile), schema, options);
  auto telemetry = parse_telemetry(path_of(synthgen::kTelemetryFile), options);
  auto errors = parse_errors(path_of(synthgen::kErrorsFile), schema, options);
  auto maintenance = parse_maintenance(path_of(synthgen::kMaintenanceFile), schema, options);
  auto failures = parse_failures(path_of(synthgen::kFailuresFile), schema, options);
  return assemble(schema, std::move(machines), std::move(telemetry), std::move(errors),
                  std::move(maintenance), std::move(failures));
}

}  // namespace fleetpdm::ingest
