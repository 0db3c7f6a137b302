#include "pois/experiment.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pois {

namespace {

const std::vector<std::uint64_t> kDefaultSeeds = {10, 109, 904, 160, 570};

// Record fields in CSV order, after the iteration column.
struct Column {
  const char* name;
  double (*get)(const IterationRecord&);
};

const Column kColumns[] = {
    {"episodes_cum", [](const IterationRecord& r) { return double(r.episodes_cum); }},
    {"avg_return", [](const IterationRecord& r) { return r.avg_return; }},
    {"ess_hat", [](const IterationRecord& r) { return r.ess_hat; }},
    {"weight_var", [](const IterationRecord& r) { return r.weight_var; }},
    {"d2_hat", [](const IterationRecord& r) { return r.d2_hat; }},
    {"bound_before", [](const IterationRecord& r) { return r.bound_before; }},
    {"bound_after", [](const IterationRecord& r) { return r.bound_after; }},
    {"policy_sigma_mean",
     [](const IterationRecord& r) { return r.policy_sigma_mean; }},
    {"offline_iters", [](const IterationRecord& r) { return double(r.offline_iters); }},
    {"step_size_last", [](const IterationRecord& r) { return r.step_size_last; }},
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string record_csv_header() {
  std::string h = "iteration";
  for (const auto& col : kColumns) {
    h += ',';
    h += col.name;
  }
  h += '\n';
  return h;
}

std::string record_csv_row(const IterationRecord& rec) {
  std::string row = std::to_string(rec.iteration);
  for (const auto& col : kColumns) {
    row += ',';
    const double v = col.get(rec);
    // Integral columns print as integers for readability.
    if (v == std::floor(v) && std::abs(v) < 1e15 && std::isfinite(v))
      row += std::to_string(static_cast<long long>(v));
    else
      row += format_double(v);
  }
  row += '\n';
  return row;
}

std::vector<std::uint64_t> ExperimentConfig::effective_seeds() const {
  return seeds.empty() ? kDefaultSeeds : seeds;
}

void ExperimentConfig::validate() const {
  if (algo != "a-pois" && algo != "p-pois")
    throw std::invalid_argument("config: algo must be a-pois or p-pois");
  if (!(delta > 0.0) || !(delta <= 1.0))
    throw std::invalid_argument("config: delta must be in (0, 1]");
  if (iterations < 1) throw std::invalid_argument("config: iterations >= 1");
  if (batch_size < 1) throw std::invalid_argument("config: batch-size >= 1");
  if (horizon < 0) throw std::invalid_argument("config: horizon >= 0");
  if (gamma > 1.0)
    throw std::invalid_argument("config: gamma must be <= 1");
  if (!estimator.empty() && estimator != "is" && estimator != "sn")
    throw std::invalid_argument("config: estimator must be is or sn");
  if (!natural.empty() && natural != "on" && natural != "off")
    throw std::invalid_argument("config: natural must be on or off");
  if (penalty != "exact" && penalty != "ess")
    throw std::invalid_argument("config: penalty must be exact or ess");
  if (!(eta > 1.0)) throw std::invalid_argument("config: eta must be > 1");
  if (max_offline < 1) throw std::invalid_argument("config: max-offline >= 1");
}

OptimizerConfig ExperimentConfig::optimizer_config(const EnvSpec& spec,
                                                   std::uint64_t seed) const {
  OptimizerConfig ocfg;
  ocfg.delta = delta;
  ocfg.n_episodes = batch_size;
  ocfg.horizon = horizon > 0 ? horizon : spec.horizon;
  ocfg.gamma = gamma >= 0.0 ? gamma : spec.gamma;
  ocfg.online_iterations = iterations;
  ocfg.max_offline_iterations = max_offline;

  const bool parameter_based = algo == "p-pois";
  const std::string est = estimator.empty()
                              ? (parameter_based ? "sn" : "is")
                              : estimator;
  ocfg.estimator = est == "sn" ? WeightEstimator::SN : WeightEstimator::IS;
  const std::string nat =
      natural.empty() ? (parameter_based ? "on" : "off") : natural;
  ocfg.natural_gradient = nat == "on";
  ocfg.penalty = penalty == "ess" ? PenaltyKind::Ess : PenaltyKind::Exact;
  ocfg.line_search.eta = eta;
  ocfg.seed = seed;
  return ocfg;
}

ExperimentConfig parse_args(int argc, const char* const* argv) {
  ExperimentConfig cfg;
  CLI::App app{"Policy optimization by importance sampling"};

  app.add_option("--env", cfg.env, "Environment")
      ->check(CLI::IsMember({"lqg", "cartpole", "mountaincar", "pendulum"}));
  app.add_option("--algo", cfg.algo, "Algorithm flavor")
      ->check(CLI::IsMember({"a-pois", "p-pois"}));
  app.add_option("--delta", cfg.delta, "Confidence parameter in (0, 1]");
  app.add_option("--iterations", cfg.iterations, "Online iterations");
  app.add_option("--batch-size", cfg.batch_size, "Episodes per iteration");
  app.add_option("--horizon", cfg.horizon, "Episode cap (0 = env default)");
  app.add_option("--gamma", cfg.gamma, "Discount (negative = env default)");
  app.add_option("--seed", cfg.seeds, "Seed, repeatable");
  app.add_option("--estimator", cfg.estimator, "Weight estimator")
      ->check(CLI::IsMember({"is", "sn"}));
  app.add_option("--natural", cfg.natural, "Natural gradient")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--penalty", cfg.penalty, "Penalty flavor")
      ->check(CLI::IsMember({"exact", "ess"}));
  app.add_option("--eta", cfg.eta, "Line search growth factor");
  app.add_option("--max-offline", cfg.max_offline,
                 "Offline iterations per batch");
  app.add_option("--output", cfg.output, "Output directory");
  app.set_config("--config", "", "key=value config file; flags override");
  app.allow_config_extras(false);  // unknown keys are an error, not noise

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    cfg.help = true;
    cfg.help_text = app.help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto env = make_env(cfg.env);
  const auto seeds = cfg.effective_seeds();
  std::filesystem::create_directories(cfg.output);
  const std::string stem = cfg.algo + "_" + cfg.env;

  ExperimentResult result;
  for (const std::uint64_t seed : seeds) {
    const OptimizerConfig ocfg = cfg.optimizer_config(env->spec(), seed);

    // The initial parameters come from a stream decoupled from the run's own.
    std::seed_seq init_seq{seed, std::uint64_t{1}};
    std::mt19937_64 init_rng(init_seq);

    SeedRun run;
    run.seed = seed;
    if (cfg.algo == "p-pois") {
      run.records =
          run_ppois(*env, initial_hyperpolicy(env->spec(), init_rng), ocfg);
    } else {
      run.records =
          run_apois(*env, initial_policy(env->spec(), init_rng), ocfg);
    }

    std::string text = record_csv_header();
    for (const auto& rec : run.records) text += record_csv_row(rec);
    const auto path = std::filesystem::path(cfg.output) /
                      (stem + "_seed" + std::to_string(seed) + ".csv");
    write_file(path, text);
    result.seed_files.push_back(path);
    result.runs.push_back(std::move(run));
  }

  // Aggregate: per-iteration mean and 95% half-width across seeds.
  std::string agg = "iteration";
  for (const auto& col : kColumns) {
    agg += ',';
    agg += col.name;
    agg += "_mean,";
    agg += col.name;
    agg += "_ci95";
  }
  agg += '\n';
  const size_t iters = result.runs.front().records.size();
  const double n = static_cast<double>(result.runs.size());
  for (size_t it = 0; it < iters; ++it) {
    agg += std::to_string(result.runs.front().records[it].iteration);
    for (const auto& col : kColumns) {
      double mean = 0.0;
      for (const auto& run : result.runs) mean += col.get(run.records[it]);
      mean /= n;
      double ci = 0.0;
      if (result.runs.size() > 1) {
        double ssq = 0.0;
        for (const auto& run : result.runs) {
          const double d = col.get(run.records[it]) - mean;
          ssq += d * d;
        }
        ci = 1.96 * std::sqrt(ssq / (n - 1.0)) / std::sqrt(n);
      }
      agg += ',';
      agg += format_double(mean);
      agg += ',';
      agg += format_double(ci);
    }
    agg += '\n';
  }
  result.aggregate_file =
      std::filesystem::path(cfg.output) / (stem + "_aggregate.csv");
  write_file(result.aggregate_file, agg);
  return result;
}

}  // namespace pois
