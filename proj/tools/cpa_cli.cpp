// cpa: command-line front end for the coded polynomial aggregation library.
//
//   cpa example1 [--seed S] [--out report.json]
//   cpa sweep    [--config FILE] [--k-min 3 --k-max 10 --degrees 1,2] [--trials T] [--out map.csv]
//   cpa simulate --K 3 --d 1 [--N 2] [--latency 4] [--single-threaded] [--out trace.jsonl]
//   cpa probe    [--points 4:1:2,5:2:5] [--trials 200] [--out probe.json]
//
// Config files hold the same settings as `key = value` lines; flags win.
// Log verbosity comes from SPDLOG_LEVEL (e.g. SPDLOG_LEVEL=debug).

#include <deque>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cpa/error.hpp"
#include "cpa/experiments.hpp"

namespace {

// Flag values are kept as text and funnelled through apply_setting, so the
// config file and the command line share one parser.
struct FlagSet {
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::deque<std::string> values;  // stable addresses for CLI11

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    values.emplace_back();
    options.emplace_back(key, app->add_option(flag, values.back(), help));
  }
};

int exit_code_for(const cpa::Error& e) {
  switch (e.code()) {
    case cpa::ErrorCode::InvalidConfig:
    case cpa::ErrorCode::InvalidParams:
    case cpa::ErrorCode::InvalidRegime:
    case cpa::ErrorCode::OutOfRegime:
    case cpa::ErrorCode::NoConstraints:
    case cpa::ErrorCode::InfeasibleCgeK:
    case cpa::ErrorCode::InfeasibleTrivialKernel:
    case cpa::ErrorCode::TooLarge:
      return cpa::exit_code::kInvalidConfig;
    default:
      return cpa::exit_code::kAssertion;
  }
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("cpa");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Coded polynomial aggregation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  bool single_threaded = false;
  FlagSet flags;
  std::vector<std::pair<CLI::App*, int (*)(const cpa::ExperimentConfig&, std::ostream&)>> commands;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value settings file");
    flags.add(sub, "--seed", "seed", "base seed");
    flags.add(sub, "--out", "out", "output path");
    flags.add(sub, "--trials", "trials", "trials per cell or probe point");
    flags.add(sub, "--k-min", "k_min", "smallest K");
    flags.add(sub, "--k-max", "k_max", "largest K");
    flags.add(sub, "--degrees", "degrees", "comma-separated task degrees");
    flags.add(sub, "--tol", "tol", "recovery-error tolerance to assert");
    flags.add(sub, "--q", "q", "rows per data matrix");
    flags.add(sub, "--v", "v", "columns per data matrix");
  };

  CLI::App* example1 = app.add_subcommand("example1", "replay the K=3 linear worked example");
  common(example1);
  commands.emplace_back(example1, &cpa::cmd_example1);

  CLI::App* sweep = app.add_subcommand("sweep", "classify the (K, d, N) grid and write the regime map");
  common(sweep);
  flags.add(sweep, "--n-policy", "n_policy", "all | nstar");
  commands.emplace_back(sweep, &cpa::cmd_sweep);

  CLI::App* simulate = app.add_subcommand("simulate", "run the master/worker simulation once");
  common(simulate);
  flags.add(simulate, "--K", "K", "number of datasets");
  flags.add(simulate, "--d", "d", "task degree");
  flags.add(simulate, "--N", "N", "number of workers (default N*)");
  flags.add(simulate, "--latency", "max_latency", "max random latency in ticks (0: none)");
  simulate->add_flag("--single-threaded", single_threaded, "run workers in index order on one thread");
  commands.emplace_back(simulate, &cpa::cmd_simulate);

  CLI::App* probe = app.add_subcommand("probe", "genericity and Cauchy-Binet batteries");
  common(probe);
  flags.add(probe, "--points", "probe_points", "K:d:N,... (default: three N* points per degree)");
  flags.add(probe, "--cb-trials", "cauchy_binet_trials", "Cauchy-Binet instances");
  commands.emplace_back(probe, &cpa::cmd_probe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cpa::exit_code::kInvalidConfig;
  }

  try {
    cpa::ExperimentConfig config = config_path.empty() ? cpa::ExperimentConfig{} : cpa::load_config(config_path);
    for (const auto& [key, option] : flags.options) {
      if (option->count() > 0) cpa::apply_setting(config, key, option->as<std::string>());
    }
    if (single_threaded) config.single_threaded = true;
    cpa::check_config(config);

    for (const auto& [sub, run] : commands) {
      if (sub->parsed()) {
        const int code = run(config, std::cerr);
        if (code != cpa::exit_code::kOk) spdlog::error("{} reported failures", sub->get_name());
        return code;
      }
    }
  } catch (const cpa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cpa::exit_code::kAssertion;
  }
  return cpa::exit_code::kOk;
}
