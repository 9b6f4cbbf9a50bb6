// Internal helpers for model parameter emission: %.17g everywhere so a
// saved model reloads to bit-identical predictions.
#pragma once

#include <ostream>
#include <vector>

namespace fleetpdm::learners {

void write_real(std::ostream& out, double v);
void write_real_list(std::ostream& out, const std::vector<double>& v);

}  // namespace fleetpdm::learners
