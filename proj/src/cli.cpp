#include "fleetpdm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "fleetpdm/ingest.hpp"
#include "fleetpdm/parallel.hpp"
#include "fleetpdm/report.hpp"
#include "fleetpdm/rng.hpp"

namespace fleetpdm::cli {

namespace fs = std::filesystem;

namespace {

long parse_int(const std::string& key, const std::string& value) {
  long v = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("config: " + key + " expects an integer, got \"" + value + "\"");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("config: " + key + " expects an unsigned integer, got \"" + value +
                                "\"");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  double v = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("config: " + key + " expects a number, got \"" + value + "\"");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: " + key + " expects true/false, got \"" + value + "\"");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string::npos) comma = value.size();
    std::string item = value.substr(start, comma - start);
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

void set_all_seeds(RunConfig& config, std::uint64_t seed) {
  config.fleet.seed = seed;
  config.split.seed = seed;
  config.learner_defaults.seed = seed;
}

double wall_seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void append_config_snapshot(Manifest& m, const RunConfig& c) {
  m.set("config.machines", c.fleet.n_machines);
  m.set("config.horizon_hours", c.fleet.horizon_hours);
  m.set("config.components", c.fleet.n_components);
  m.set("config.error_types", c.fleet.n_error_types);
  m.set("config.models", c.fleet.n_models);
  m.set("config.failure_rate", c.fleet.failure_rate_target);
  m.set("config.error_rate", c.fleet.error_rate_target);
  m.set("config.maint_interval_days", c.fleet.scheduled_maint_interval_days);
  m.set("config.degradation_lead_hours", c.fleet.degradation_lead_hours);
  m.set("config.seed", c.fleet.seed);
  m.set("config.fast_lag", c.features.fast_lag_hours);
  m.set("config.slow_lag", c.features.slow_lag_hours);
  m.set("config.error_window", c.features.error_window_hours);
  m.set("config.label_horizon", c.features.label_horizon_hours);
  m.set("config.stride", c.features.sampling_stride_hours);
  std::string fractions;
  for (double f : c.split.train_fractions) {
    if (!fractions.empty()) fractions += ',';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", f);
    fractions += buf;
  }
  m.set("config.fractions", fractions);
  m.set("config.balance_ratio", c.split.balance_ratio);
  m.set("config.balance_test", c.split.balance_test);
  m.set("config.timing_repetitions", c.split.timing_repetitions);
  std::string learner_list;
  for (const auto& l : c.learner_set) {
    if (!learner_list.empty()) learner_list += ',';
    learner_list += l;
  }
  m.set("config.learners", learner_list);
  m.set("config.strict_ingest", c.strict_ingest);
  const auto& d = c.learner_defaults;
  m.set("config.pda.lambda", d.pda_lambda);
  m.set("config.mda.subclasses", d.mda_subclasses);
  m.set("config.mda.em_max_iter", d.mda_em_max_iter);
  m.set("config.mda.em_rel_tol", d.mda_em_rel_tol);
  m.set("config.mars.max_terms", d.mars_max_terms);
  m.set("config.mars.gcv_penalty", d.mars_gcv_penalty);
  m.set("config.gbm.n_trees", d.gbm_n_trees);
  m.set("config.gbm.max_depth", d.gbm_max_depth);
  m.set("config.gbm.shrinkage", d.gbm_shrinkage);
  m.set("config.rf.n_trees", d.rf_n_trees);
  m.set("config.rf.mtry", d.rf_mtry);
  m.set("config.rf.min_leaf", d.rf_min_leaf);
}

features::FeatureMatrix load_matrix(const RunConfig& config, const std::string& features_file,
                                    const std::string& data_dir, Manifest& manifest) {
  if (!features_file.empty()) {
    manifest.set("input.features", features_file);
    return features::read_matrix_csv(features_file);
  }
  if (data_dir.empty()) {
    throw std::invalid_argument("either a feature file or a data directory is required");
  }
  manifest.set("input.data_dir", data_dir);
  auto schema = FleetSchema::with_counts(config.fleet.n_components, config.fleet.n_error_types,
                                         config.fleet.n_models);
  ingest::ParseOptions options;
  options.strict = config.strict_ingest;
  ingest::ParseReport report;
  options.report = &report;
  auto dataset = ingest::load_directory(data_dir, schema, options);
  auto built = features::build_matrix(dataset, config.features);
  manifest.set("rows.features", built.report.rows_emitted);
  manifest.set("rows.dropped_insufficient_history",
               built.report.rows_dropped_insufficient_history);
  manifest.set("rows.skipped_ingest", report.rows_skipped);
  return std::move(built.matrix);
}

}  // namespace

void apply_config_line(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "machines") c.fleet.n_machines = static_cast<int>(parse_int(key, value));
  else if (key == "horizon_hours") c.fleet.horizon_hours = static_cast<int>(parse_int(key, value));
  else if (key == "components") c.fleet.n_components = static_cast<int>(parse_int(key, value));
  else if (key == "error_types") c.fleet.n_error_types = static_cast<int>(parse_int(key, value));
  else if (key == "models") c.fleet.n_models = static_cast<int>(parse_int(key, value));
  else if (key == "failure_rate") c.fleet.failure_rate_target = parse_real(key, value);
  else if (key == "error_rate") c.fleet.error_rate_target = parse_real(key, value);
  else if (key == "maint_interval_days")
    c.fleet.scheduled_maint_interval_days = static_cast<int>(parse_int(key, value));
  else if (key == "degradation_lead_hours")
    c.fleet.degradation_lead_hours = static_cast<int>(parse_int(key, value));
  else if (key == "seed") set_all_seeds(c, parse_u64(key, value));
  else if (key == "fast_lag") c.features.fast_lag_hours = static_cast<int>(parse_int(key, value));
  else if (key == "slow_lag") c.features.slow_lag_hours = static_cast<int>(parse_int(key, value));
  else if (key == "error_window")
    c.features.error_window_hours = static_cast<int>(parse_int(key, value));
  else if (key == "label_horizon")
    c.features.label_horizon_hours = static_cast<int>(parse_int(key, value));
  else if (key == "stride")
    c.features.sampling_stride_hours = static_cast<int>(parse_int(key, value));
  else if (key == "fractions") {
    c.split.train_fractions.clear();
    for (const auto& item : split_list(value)) {
      c.split.train_fractions.push_back(parse_real(key, item));
    }
  } else if (key == "balance_ratio") c.split.balance_ratio = parse_real(key, value);
  else if (key == "balance_test") c.split.balance_test = parse_bool(key, value);
  else if (key == "timing_repetitions")
    c.split.timing_repetitions = static_cast<int>(parse_int(key, value));
  else if (key == "learners") c.learner_set = split_list(value);
  else if (key == "strict_ingest") c.strict_ingest = parse_bool(key, value);
  else if (key == "pda.lambda") c.learner_defaults.pda_lambda = parse_real(key, value);
  else if (key == "mda.subclasses")
    c.learner_defaults.mda_subclasses = static_cast<int>(parse_int(key, value));
  else if (key == "mda.em_max_iter")
    c.learner_defaults.mda_em_max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "mda.em_rel_tol") c.learner_defaults.mda_em_rel_tol = parse_real(key, value);
  else if (key == "mars.max_terms")
    c.learner_defaults.mars_max_terms = static_cast<int>(parse_int(key, value));
  else if (key == "mars.gcv_penalty")
    c.learner_defaults.mars_gcv_penalty = parse_real(key, value);
  else if (key == "gbm.n_trees")
    c.learner_defaults.gbm_n_trees = static_cast<int>(parse_int(key, value));
  else if (key == "gbm.max_depth")
    c.learner_defaults.gbm_max_depth = static_cast<int>(parse_int(key, value));
  else if (key == "gbm.shrinkage") c.learner_defaults.gbm_shrinkage = parse_real(key, value);
  else if (key == "rf.n_trees")
    c.learner_defaults.rf_n_trees = static_cast<int>(parse_int(key, value));
  else if (key == "rf.mtry") c.learner_defaults.rf_mtry = static_cast<int>(parse_int(key, value));
  else if (key == "rf.min_leaf")
    c.learner_defaults.rf_min_leaf = static_cast<int>(parse_int(key, value));
  else throw std::invalid_argument("config: unknown key \"" + key + "\"");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  RunConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value, got \"" + line + "\"");
    }
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    try {
      apply_config_line(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

int worker_count() { return fleetpdm::worker_count(); }

RunConfig resolve_config(const CommonOptions& options) {
  RunConfig config = options.config_path ? load_config(*options.config_path) : RunConfig{};
  if (options.seed) set_all_seeds(config, *options.seed);
  if (options.learners) config.learner_set = split_list(*options.learners);
  if (options.strict_ingest) config.strict_ingest = *options.strict_ingest;
  if (config.learner_set.empty()) {
    throw std::invalid_argument("learner set must name at least one learner");
  }
  return config;
}

std::vector<learners::LearnerSpec> learner_specs(const RunConfig& config) {
  std::vector<learners::LearnerSpec> specs;
  specs.reserve(config.learner_set.size());
  for (const auto& name : config.learner_set) {
    learners::LearnerSpec spec = config.learner_defaults;
    spec.family = learners::family_from_name(name);
    specs.push_back(spec);
  }
  return specs;
}

Manifest cmd_generate(const RunConfig& config, const std::string& out_dir, bool force) {
  auto t0 = std::chrono::steady_clock::now();
  auto dataset = synthgen::generate_fleet(config.fleet);
  Manifest m = synthgen::write_fleet(dataset, config.fleet, out_dir, force);
  m.set("command", "generate");
  m.set("out_dir", out_dir);
  append_config_snapshot(m, config);
  m.set("wall_clock_seconds", wall_seconds_since(t0));
  m.write((fs::path(out_dir) / synthgen::kManifestFile).string());
  return m;
}

Manifest cmd_featurize(const RunConfig& config, const std::string& data_dir,
                       const std::string& out_file) {
  auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.set("command", "featurize");
  auto matrix = load_matrix(config, "", data_dir, m);
  features::write_matrix_csv(matrix, out_file);
  m.set("out_file", out_file);
  m.set("rows.positive", matrix.count_label(1));
  m.set("rows.negative", matrix.count_label(0));
  m.set("features.count", static_cast<long>(matrix.ledger.size()));
  append_config_snapshot(m, config);
  m.set("checksum.features", file_checksum_hex(out_file));
  m.set("wall_clock_seconds", wall_seconds_since(t0));
  fs::path manifest_path = fs::path(out_file).parent_path() / "featurize_manifest.txt";
  m.write(manifest_path.string());
  return m;
}

Manifest cmd_bench(const RunConfig& config, const std::string& features_file,
                   const std::string& data_dir, const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  Manifest m;
  m.set("command", "bench");
  auto matrix = load_matrix(config, features_file, data_dir, m);
  auto result = evalbench::run_benchmark(matrix, learner_specs(config), config.split);

  const std::string csv = (fs::path(out_dir) / "bench.csv").string();
  const std::string md = (fs::path(out_dir) / "bench.md").string();
  const std::string svg = (fs::path(out_dir) / "bench.svg").string();
  report::write_bench_csv(result, csv);
  report::write_bench_markdown(result, md);
  report::write_bench_svg(result, svg);

  m.set("rows.matrix", static_cast<long>(matrix.rows.size()));
  append_config_snapshot(m, config);
  m.set("checksum.bench.csv", file_checksum_hex(csv));
  m.set("checksum.bench.md", file_checksum_hex(md));
  m.set("checksum.bench.svg", file_checksum_hex(svg));
  m.set("wall_clock_seconds", wall_seconds_since(t0));
  m.write((fs::path(out_dir) / "bench_manifest.txt").string());
  return m;
}

Manifest cmd_importance(const RunConfig& config, const std::string& features_file,
                        const std::string& data_dir, const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  Manifest m;
  m.set("command", "importance");
  auto matrix = load_matrix(config, features_file, data_dir, m);
  learners::LearnerSpec rf_spec = config.learner_defaults;
  rf_spec.family = learners::LearnerFamily::rf;
  auto report_data = evalbench::rank_features(matrix, rf_spec, config.split);

  const std::string csv = (fs::path(out_dir) / "importance.csv").string();
  const std::string md = (fs::path(out_dir) / "importance.md").string();
  const std::string svg = (fs::path(out_dir) / "importance.svg").string();
  report::write_importance_csv(report_data, csv);
  report::write_importance_markdown(report_data, md);
  report::write_importance_svg(report_data, svg);

  m.set("rows.matrix", static_cast<long>(matrix.rows.size()));
  append_config_snapshot(m, config);
  m.set("checksum.importance.csv", file_checksum_hex(csv));
  m.set("checksum.importance.md", file_checksum_hex(md));
  m.set("checksum.importance.svg", file_checksum_hex(svg));
  m.set("wall_clock_seconds", wall_seconds_since(t0));
  m.write((fs::path(out_dir) / "importance_manifest.txt").string());
  return m;
}

}  // namespace fleetpdm::cli
