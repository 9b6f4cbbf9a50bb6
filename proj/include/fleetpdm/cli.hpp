// Command implementations behind the fleetpdm binary: generate, featurize,
// bench, importance. Config files are flat key=value text; every flag
// overrides its config key; each command writes a manifest describing its
// inputs, outputs and checksums.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fleetpdm/evalbench.hpp"
#include "fleetpdm/features.hpp"
#include "fleetpdm/manifest.hpp"
#include "fleetpdm/synthgen.hpp"

namespace fleetpdm::cli {

struct RunConfig {
  synthgen::FleetConfig fleet;
  features::FeatureConfig features;
  evalbench::SplitSpec split;
  learners::LearnerSpec learner_defaults;  // family-specific hyperparameters
  std::vector<std::string> learner_set = {"lda", "pda", "mda", "mars", "gbm", "rf"};
  bool strict_ingest = true;
};

// Parse a key=value config file ('#' comments, blank lines allowed).
// Unknown keys are errors; see README for the full key table.
RunConfig load_config(const std::string& path);
void apply_config_line(RunConfig& config, const std::string& key, const std::string& value);

// Worker cap from FLEETPDM_THREADS (>= 1); hardware default otherwise.
int worker_count();

struct CommonOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> learners;  // comma list
  std::optional<bool> strict_ingest;
};

RunConfig resolve_config(const CommonOptions& options);

// Each command returns the manifest it wrote. Errors surface as exceptions;
// the binary turns them into a single-line message and a nonzero exit.
Manifest cmd_generate(const RunConfig& config, const std::string& out_dir, bool force);
Manifest cmd_featurize(const RunConfig& config, const std::string& data_dir,
                       const std::string& out_file);
Manifest cmd_bench(const RunConfig& config, const std::string& features_file,
                   const std::string& data_dir, const std::string& out_dir);
Manifest cmd_importance(const RunConfig& config, const std::string& features_file,
                        const std::string& data_dir, const std::string& out_dir);

std::vector<learners::LearnerSpec> learner_specs(const RunConfig& config);

}  // namespace fleetpdm::cli
