// Parse and validate the five CSV event streams and join them into a
// FleetDataset on the hourly grid. The schemas replicate the public
// dataset layout so it drops in unchanged.
#pragma once

#include <string>
#include <vector>

#include "fleetpdm/dataset.hpp"

namespace fleetpdm::ingest {

struct ParseReport {
  long rows_accepted = 0;
  long rows_skipped = 0;
  std::vector<std::string> skipped;  // "<file>:<line>: <reason>"
};

struct ParseOptions {
  // Strict mode fails on the first malformed row; otherwise bad rows are
  // skipped and logged into the report.
  bool strict = true;
  ParseReport* report = nullptr;
};

// Expected header rows, in file order.
std::vector<std::string> telemetry_header();
std::vector<std::string> errors_header();
std::vector<std::string> maintenance_header();
std::vector<std::string> failures_header();
std::vector<std::string> machines_header();

std::vector<MachineRecord> parse_machines(const std::string& path, const FleetSchema& schema,
                                          const ParseOptions& options = {});
std::vector<TelemetryRecord> parse_telemetry(const std::string& path,
                                             const ParseOptions& options = {});
std::vector<ErrorRecord> parse_errors(const std::string& path, const FleetSchema& schema,
                                      const ParseOptions& options = {});
std::vector<MaintenanceRecord> parse_maintenance(const std::string& path,
                                                 const FleetSchema& schema,
                                                 const ParseOptions& options = {});
std::vector<FailureRecord> parse_failures(const std::string& path, const FleetSchema& schema,
                                          const ParseOptions& options = {});

// Sorts every stream by (timestamp, machine_id), checks referential
// integrity against `machines`, and rejects duplicate telemetry keys.
// Throws std::runtime_error with a description of the first violation.
FleetDataset assemble(const FleetSchema& schema, std::vector<MachineRecord> machines,
                      std::vector<TelemetryRecord> telemetry, std::vector<ErrorRecord> errors,
                      std::vector<MaintenanceRecord> maintenance,
                      std::vector<FailureRecord> failures);

// Convenience wrapper: parse the five files of `directory` and assemble.
FleetDataset load_directory(const std::string& directory, const FleetSchema& schema,
                            const ParseOptions& options = {});

}  // namespace fleetpdm::ingest
