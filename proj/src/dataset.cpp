#include "fleetpdm/dataset.hpp"

namespace fleetpdm {

const char* const kSensorNames[kNumSensors] = {"volt", "rotate", "pressure", "vibration"};

FleetSchema FleetSchema::with_counts(int n_components, int n_error_types, int n_models) {
  FleetSchema s;
  s.component_labels.reserve(n_components);
  for (int i = 1; i <= n_components; ++i) s.component_labels.push_back("comp" + std::to_string(i));
  s.error_labels.reserve(n_error_types);
  for (int i = 1; i <= n_error_types; ++i) s.error_labels.push_back("error" + std::to_string(i));
  s.model_labels.reserve(n_models);
  for (int i = 1; i <= n_models; ++i) s.model_labels.push_back("model" + std::to_string(i));
  return s;
}

int FleetSchema::index_of(const std::vector<std::string>& labels, std::string_view label) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace fleetpdm
