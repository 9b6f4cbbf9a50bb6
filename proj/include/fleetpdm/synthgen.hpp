// Seedable synthetic fleet generator. Reproduces the shape and event-rate
// statistics of the public 100-machine dataset and plants a fixed causal
// structure ahead of every failure: precursor error bursts plus a shifted
// rotation mean throughout the degradation lead window. Identical configs
// produce byte-identical output streams.
#pragma once

#include <cstdint>
#include <string>

#include "fleetpdm/dataset.hpp"
#include "fleetpdm/manifest.hpp"

namespace fleetpdm::synthgen {

struct FleetConfig {
  int n_machines = 10;
  int horizon_hours = 2160;
  int n_components = 4;
  int n_error_types = 5;
  int n_models = 4;
  double failure_rate_target = 1.0 / 4000.0;  // per machine-hour
  double error_rate_target = 1.0 / 1000.0;    // per machine-hour, all types
  int scheduled_maint_interval_days = 15;
  int degradation_lead_hours = 72;
  std::uint64_t seed = 42;

  // Throws std::invalid_argument when counts are negative, rates are not
  // 0 < failure <= error < 1, or the lead window is shorter than 24h.
  void validate() const;
};

struct GenerationStats {
  long telemetry_rows = 0;
  long error_rows = 0;
  long maintenance_rows = 0;
  long failure_rows = 0;
  long machine_rows = 0;
  double machine_hours = 0;
  double empirical_failure_rate = 0;  // failures per machine-hour
  double empirical_error_rate = 0;    // errors per machine-hour
  bool empty = false;
};

FleetDataset generate_fleet(const FleetConfig& config);

GenerationStats summarize(const FleetDataset& dataset, const FleetConfig& config);

// Writes telemetry.csv, errors.csv, maint.csv, failures.csv, machines.csv
// and manifest.txt into `directory` (created if missing). Refuses to clobber
// existing stream files unless `overwrite` is set. Returns the manifest.
Manifest write_fleet(const FleetDataset& dataset, const FleetConfig& config,
                     const std::string& directory, bool overwrite = false);

// File names used by write_fleet and expected by ingest.
extern const char* const kTelemetryFile;
extern const char* const kErrorsFile;
extern const char* const kMaintenanceFile;
extern const char* const kFailuresFile;
extern const char* const kMachinesFile;
extern const char* const kManifestFile;

}  // namespace fleetpdm::synthgen
