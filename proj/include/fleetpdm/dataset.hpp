// In-memory form of the five fleet event streams plus the label schema
// (component / error-type / model names) they are validated against.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fleetpdm/timeline.hpp"

namespace fleetpdm {

// Declared label sets. Streams may only reference labels listed here;
// the defaults match the public dataset layout (comp1..4, error1..5,
// model1..4).
struct FleetSchema {
  std::vector<std::string> component_labels;
  std::vector<std::string> error_labels;
  std::vector<std::string> model_labels;

  static FleetSchema with_counts(int n_components, int n_error_types, int n_models);

  int n_components() const { return static_cast<int>(component_labels.size()); }
  int n_error_types() const { return static_cast<int>(error_labels.size()); }
  int n_models() const { return static_cast<int>(model_labels.size()); }

  // Index of `label` in the given set, or -1.
  static int index_of(const std::vector<std::string>& labels, std::string_view label);

  bool operator==(const FleetSchema&) const = default;
};

struct MachineRecord {
  int machine_id = 0;
  int model_index = 0;  // into FleetSchema::model_labels
  int age_years = 0;
  bool operator==(const MachineRecord&) const = default;
};

struct TelemetryRecord {
  EpochHour timestamp = 0;
  int machine_id = 0;
  double volt = 0;
  double rotate = 0;
  double pressure = 0;
  double vibration = 0;
  bool operator==(const TelemetryRecord&) const = default;
};

struct ErrorRecord {
  EpochHour timestamp = 0;
  int machine_id = 0;
  int error_index = 0;  // into FleetSchema::error_labels
  bool operator==(const ErrorRecord&) const = default;
};

struct MaintenanceRecord {
  EpochHour timestamp = 0;
  int machine_id = 0;
  int component_index = 0;  // into FleetSchema::component_labels
  bool operator==(const MaintenanceRecord&) const = default;
};

struct FailureRecord {
  EpochHour timestamp = 0;
  int machine_id = 0;
  int component_index = 0;
  bool operator==(const FailureRecord&) const = default;
};

inline constexpr int kNumSensors = 4;
extern const char* const kSensorNames[kNumSensors];  // volt, rotate, pressure, vibration

// The assembled dataset. Invariants (enforced by ingest::assemble):
// every machine_id referenced by a stream exists in `machines`; each
// stream is sorted by (timestamp, machine_id); telemetry keys are unique.
struct FleetDataset {
  FleetSchema schema;
  std::vector<MachineRecord> machines;
  std::vector<TelemetryRecord> telemetry;
  std::vector<ErrorRecord> errors;
  std::vector<MaintenanceRecord> maintenance;
  std::vector<FailureRecord> failures;

  bool empty() const {
    return machines.empty() && telemetry.empty() && errors.empty() &&
           maintenance.empty() && failures.empty();
  }

  bool operator==(const FleetDataset&) const = default;
};

}  // namespace fleetpdm
