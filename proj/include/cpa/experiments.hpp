#pragma once

// Command implementations behind the cpa command-line tool. Each command
// takes a fully resolved ExperimentConfig, writes its artifacts, prints a
// short human summary to `log`, and returns a process exit code.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpa/scheme.hpp"

namespace cpa {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kAssertion = 1;
inline constexpr int kInvalidConfig = 2;
}  // namespace exit_code

enum class NPolicy { All, NStarOnly };

struct ProbePoint {
  int K = 0;
  int d = 0;
  int N = 0;
};

struct ExperimentConfig {
  int k_min = 3;
  int k_max = 10;
  std::vector<int> degrees{1, 2};
  NPolicy n_policy = NPolicy::All;
  int trials = 5;
  std::uint64_t seed = 1;
  std::string out;   // empty: stdout for reports, a default name for traces
  double tol = 1e-6;  // recovery-error bound a command asserts

  int q = 2;  // instance matrix shape
  int v = 2;

  // simulate
  int K = 3;
  int d = 1;
  std::optional<int> N;  // defaults to N*(K, d)
  std::uint64_t max_latency = 0;
  bool single_threaded = false;

  // probe
  std::vector<ProbePoint> probe_points;  // empty: three N* points per degree
  int cauchy_binet_trials = 100;
};

/// Parses flat `key = value` lines; `#` starts a comment. Unknown keys and
/// malformed values throw InvalidConfig.
ExperimentConfig parse_config(std::istream& in, const std::string& origin = "config");
ExperimentConfig load_config(const std::string& path);

/// Applies one key/value pair with the same spelling as the config file.
/// Throws InvalidConfig.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Throws InvalidConfig on empty ranges, trials < 1, K < 2, and so on.
void check_config(const ExperimentConfig& config);

/// "1,2,3" -> {1,2,3}. Throws InvalidConfig.
std::vector<int> parse_int_list(const std::string& text);

enum class Classification { CpaFeasible, IndividualOnly, Infeasible };

std::string_view to_string(Classification c);

struct RegimeRow {
  int K = 0;
  int d = 0;
  int N = 0;
  int N_star = 0;
  int individual_threshold = 0;
  Classification classification = Classification::Infeasible;
  std::optional<double> mean_residual;        // orthogonality residual / residual scale
  std::optional<double> mean_recovery_error;  // end-to-end, relative Frobenius
  int trials = 0;
  std::string certificate;  // verdict behind the classification
};

/// Regime of (K, d, N) from the thresholds alone.
Classification classify(int K, int d, int N);

/// One row per (K, d, N) cell. Cells run in parallel; every trial seeds from
/// sub_seed(seed, {K, d, N, trial}), so the rows never depend on scheduling.
std::vector<RegimeRow> run_sweep(const ExperimentConfig& config);

/// CSV with a fixed header; reals printed with 17 significant digits, absent
/// metrics as "nan".
void write_regime_csv(std::ostream& out, const std::vector<RegimeRow>& rows);

int cmd_example1(const ExperimentConfig& config, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, std::ostream& log);
int cmd_simulate(const ExperimentConfig& config, std::ostream& log);
int cmd_probe(const ExperimentConfig& config, std::ostream& log);

}  // namespace cpa
