#pragma once

// Experiment front end: flag/config-file parsing, multi-seed runs, CSV
// output. CSVs are written with shortest round-trip number formatting and a
// fixed column set, so identical configs reproduce byte-identical files.

#include "pois/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pois {

struct ExperimentConfig {
  std::string env = "lqg";
  std::string algo = "a-pois";  // a-pois | p-pois
  double delta = 0.4;
  int iterations = 500;
  int batch_size = 100;
  int horizon = 0;     // 0 = environment default
  double gamma = -1.0; // negative = environment default
  std::vector<std::uint64_t> seeds;  // empty = {10, 109, 904, 160, 570}
  std::string estimator;  // "is" | "sn" | "" (per-algorithm default)
  std::string natural;    // "on" | "off" | "" (per-algorithm default)
  std::string penalty = "exact";  // exact | ess
  double eta = 2.0;
  int max_offline = 10;
  std::string output = ".";

  bool help = false;       // --help was given; help_text holds the usage
  std::string help_text;

  std::vector<std::uint64_t> effective_seeds() const;
  // Resolve per-environment and per-algorithm defaults into a runnable config.
  OptimizerConfig optimizer_config(const EnvSpec& spec,
                                   std::uint64_t seed) const;
  void validate() const;  // throws std::invalid_argument
};

// --config FILE is read first (key=value lines, keys named like the long
// flags), then command-line flags override. Throws std::invalid_argument on
// unknown flags/keys or malformed values.
ExperimentConfig parse_args(int argc, const char* const* argv);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<IterationRecord> records;
};

struct ExperimentResult {
  std::vector<SeedRun> runs;
  std::vector<std::filesystem::path> seed_files;
  std::filesystem::path aggregate_file;
};

// Runs every seed sequentially, writes <algo>_<env>_seed<k>.csv per seed and
// <algo>_<env>_aggregate.csv (per-iteration mean and 95% normal-approximation
// half-width across seeds) under cfg.output.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV pieces, exposed for the tests.
std::string record_csv_header();
std::string record_csv_row(const IterationRecord& rec);
std::string format_double(double v);  // shortest round-trip, locale-free

}  // namespace pois
