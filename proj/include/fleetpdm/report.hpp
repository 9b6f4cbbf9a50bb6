// Result emission: CSV and markdown tables plus dependency-free SVG bar
// charts with a fixed 800x600 viewBox and deterministic layout, so chart
// files from identical runs diff clean.
#pragma once

#include <string>

#include "fleetpdm/evalbench.hpp"

namespace fleetpdm::report {

// Learner rows sorted by median accuracy (descending, ties by name).
void write_bench_csv(const evalbench::BenchResult& result, const std::string& path);
void write_bench_markdown(const evalbench::BenchResult& result, const std::string& path);
void write_bench_svg(const evalbench::BenchResult& result, const std::string& path);

void write_importance_csv(const evalbench::ImportanceReport& report, const std::string& path);
void write_importance_markdown(const evalbench::ImportanceReport& report,
                               const std::string& path);
void write_importance_svg(const evalbench::ImportanceReport& report, const std::string& path);

}  // namespace fleetpdm::report
