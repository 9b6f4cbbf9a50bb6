// fleetpdm: synthesize a fleet dataset, build the feature matrix, benchmark
// the classifier suite, and rank feature importance.
//
//   fleetpdm generate   --out data/              [--config run.cfg] [--seed N] [--force]
//   fleetpdm featurize  --data data/ --out features.csv
//   fleetpdm bench      --features features.csv --out results/ [--learners pda,gbm]
//   fleetpdm importance --features features.csv --out results/
//
// Every flag overrides its config-file key; FLEETPDM_THREADS caps worker
// threads (timed benchmark sections always run on a single worker).

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "fleetpdm/cli.hpp"

namespace {

struct Args {
  fleetpdm::cli::CommonOptions common;
  std::string out;
  std::string data_dir;
  std::string features_file;
  bool force = false;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.common.config_path, "key=value config file");
  cmd->add_option("--seed", args.common.seed, "root seed; overrides the config seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fleet predictive-maintenance pipeline and classifier benchmark"};
  app.require_subcommand(1);
  Args args;

  CLI::App* generate = app.add_subcommand("generate", "synthesize the five fleet CSV streams");
  add_common(generate, args);
  generate->add_option("--out", args.out, "output directory")->required();
  generate->add_flag("--force", args.force, "overwrite existing stream files");

  CLI::App* featurize = app.add_subcommand("featurize", "build the feature matrix CSV");
  add_common(featurize, args);
  featurize->add_option("--data", args.data_dir, "directory with the five CSV streams")
      ->required();
  featurize->add_option("--out", args.out, "output feature CSV path")->required();
  featurize->add_option("--strict-ingest", args.common.strict_ingest,
                        "fail on malformed rows instead of skip-and-log (default true)");

  CLI::App* bench = app.add_subcommand("bench", "time and score the classifier suite");
  add_common(bench, args);
  bench->add_option("--features", args.features_file, "feature matrix CSV from featurize");
  bench->add_option("--data", args.data_dir, "raw data directory (featurized on the fly)");
  bench->add_option("--out", args.out, "output directory")->required();
  bench->add_option("--learners", args.common.learners, "comma list, e.g. lda,pda,mda,mars,gbm,rf");
  bench->add_option("--strict-ingest", args.common.strict_ingest,
                    "fail on malformed rows instead of skip-and-log (default true)");

  CLI::App* importance = app.add_subcommand("importance", "rank feature importance");
  add_common(importance, args);
  importance->add_option("--features", args.features_file, "feature matrix CSV from featurize");
  importance->add_option("--data", args.data_dir, "raw data directory (featurized on the fly)");
  importance->add_option("--out", args.out, "output directory")->required();
  importance->add_option("--strict-ingest", args.common.strict_ingest,
                         "fail on malformed rows instead of skip-and-log (default true)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = fleetpdm::cli::resolve_config(args.common);
    if (generate->parsed()) {
      fleetpdm::cli::cmd_generate(config, args.out, args.force);
    } else if (featurize->parsed()) {
      fleetpdm::cli::cmd_featurize(config, args.data_dir, args.out);
    } else if (bench->parsed()) {
      fleetpdm::cli::cmd_bench(config, args.features_file, args.data_dir, args.out);
    } else if (importance->parsed()) {
      fleetpdm::cli::cmd_importance(config, args.features_file, args.data_dir, args.out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fleetpdm: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
