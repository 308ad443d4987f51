#include "cpa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cpa/error.hpp"
#include "cpa/pipeline.hpp"
#include "cpa/random.hpp"
#include "cpa/simulator.hpp"

namespace cpa {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    bad_config("bad value for " + key + ": '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad_config("bad value for " + key + ": '" + text + "'");
}

std::string fmt17(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_complex(CScalar z, int digits = 17) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*g%c%.*gi", digits, z.real(), std::signbit(z.imag()) ? '-' : '+', digits,
                std::abs(z.imag()));
  return buf;
}

Json complex_list(std::span<const CScalar> values) {
  Json out = Json::array();
  for (CScalar z : values) out.push_back(format_complex(z));
  return out;
}

// Writes to `path`, or to stdout when the path is empty.
void write_output(const std::string& path, const std::string& contents) {
  if (path.empty()) {
    std::cout << contents;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot open " + path + " for writing");
  f << contents;
  if (!f) throw Error(ErrorCode::InvalidConfig, "failed writing " + path);
}

std::uint64_t u64(int x) { return static_cast<std::uint64_t>(x); }

RegimeRow sweep_cell(const ExperimentConfig& config, int K, int d, int N) {
  RegimeRow row;
  row.K = K;
  row.d = d;
  row.N = N;
  row.N_star = min_responses(K, d);
  row.individual_threshold = individual_threshold(K, d);
  row.classification = classify(K, d, N);

  const auto cell_seed = [&](int trial, int stream) {
    return sub_seed(config.seed, {u64(K), u64(d), u64(N), u64(trial), u64(stream)});
  };

  if (row.classification == Classification::Infeasible) {
    const SystemParams params = random_params(K, d, N, cell_seed(0, 0));
    if (N < 2) {
      row.certificate = "OutOfRegime";
    } else {
      row.certificate = std::string(to_string(infeasibility_certificate(params).verdict));
    }
    return row;
  }

  double residual_sum = 0.0;
  double error_sum = 0.0;
  int completed = 0;
  std::string failure;
  for (int t = 0; t < config.trials; ++t) {
    const SystemParams params = random_params(K, d, N, cell_seed(t, 0));
    Rng rng(cell_seed(t, 2));
    const Dataset data = random_dataset(static_cast<std::size_t>(K), static_cast<std::size_t>(config.q),
                                        static_cast<std::size_t>(config.v), rng);
    const TaskSpec task = random_task(d, rng);
    const CMatrix truth = ground_truth(data, task, params.w);
    try {
      if (row.classification == Classification::CpaFeasible) {
        const CpaScheme scheme = construct_evaluation_points(params, cell_seed(t, 1));
        residual_sum += orthogonality_residual(scheme) / residual_scale(scheme);
        error_sum += recovery_error(run_pipeline(data, task, scheme), truth);
      } else {
        const CpaScheme scheme = individual_decoding_scheme(params, cell_seed(t, 1));
        std::vector<WorkerResponse> responses;
        for (const EncodedShare& share : encode(data, scheme)) responses.push_back(worker_compute(share, task));
        error_sum += recovery_error(decode_individual(std::move(responses), scheme.beta, params).aggregate, truth);
      }
      ++completed;
    } catch (const Error& e) {
      if (failure.empty()) failure = std::string(to_string(e.code()));
    }
  }
  row.trials = completed;
  if (completed > 0) {
    if (row.classification == Classification::CpaFeasible) row.mean_residual = residual_sum / completed;
    row.mean_recovery_error = error_sum / completed;
  }
  if (!failure.empty()) {
    row.certificate = failure + " in " + std::to_string(config.trials - completed) + " of " +
                      std::to_string(config.trials) + " trials";
  } else {
    row.certificate = row.classification == Classification::CpaFeasible ? "Feasible" : "IndividualDecodingRegime";
  }
  return row;
}

std::vector<ProbePoint> default_probe_points(const ExperimentConfig& config) {
  std::vector<ProbePoint> points;
  for (int d : config.degrees) {
    for (int K = config.k_min; K <= config.k_max && K < config.k_min + 3; ++K) {
      points.push_back({K, d, min_responses(K, d)});
    }
  }
  return points;
}

// Random (K, d, N) with K <= 6 and 1 <= C <= min(4, K, N+1).
SystemParams cauchy_binet_instance(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pick_k(2, 6);
  std::uniform_int_distribution<int> pick_d(1, 3);
  while (true) {
    const int K = pick_k(rng);
    const int d = pick_d(rng);
    std::uniform_int_distribution<int> pick_c(1, std::min(4, K));
    const int C = pick_c(rng);
    const int N = d * (K - 1) + 1 - C;
    if (N < 1 || C > N + 1) continue;
    return random_params(K, d, N, rng());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<int>("list", item));
  }
  if (out.empty()) bad_config("empty list: '" + text + "'");
  return out;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "k_min") {
    c.k_min = parse_number<int>(key, value);
  } else if (key == "k_max") {
    c.k_max = parse_number<int>(key, value);
  } else if (key == "degrees") {
    c.degrees = parse_int_list(value);
  } else if (key == "n_policy") {
    const std::string v = trim(value);
    if (v == "all") {
      c.n_policy = NPolicy::All;
    } else if (v == "nstar" || v == "n_star") {
      c.n_policy = NPolicy::NStarOnly;
    } else {
      bad_config("n_policy must be 'all' or 'nstar'");
    }
  } else if (key == "trials") {
    c.trials = parse_number<int>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "out") {
    c.out = trim(value);
  } else if (key == "tol") {
    c.tol = parse_number<double>(key, value);
  } else if (key == "q") {
    c.q = parse_number<int>(key, value);
  } else if (key == "v") {
    c.v = parse_number<int>(key, value);
  } else if (key == "K") {
    c.K = parse_number<int>(key, value);
  } else if (key == "d") {
    c.d = parse_number<int>(key, value);
  } else if (key == "N") {
    c.N = parse_number<int>(key, value);
  } else if (key == "max_latency") {
    c.max_latency = parse_number<std::uint64_t>(key, value);
  } else if (key == "single_threaded") {
    c.single_threaded = parse_bool(key, value);
  } else if (key == "cauchy_binet_trials") {
    c.cauchy_binet_trials = parse_number<int>(key, value);
  } else if (key == "probe_points") {
    // "K:d:N,K:d:N,..."
    c.probe_points.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;
      std::stringstream parts(item);
      std::string k, d, n;
      if (!std::getline(parts, k, ':') || !std::getline(parts, d, ':') || !std::getline(parts, n)) {
        bad_config("probe point must be K:d:N, got '" + item + "'");
      }
      c.probe_points.push_back(
          {parse_number<int>("K", k), parse_number<int>("d", d), parse_number<int>("N", n)});
    }
  } else {
    bad_config("unknown setting '" + raw_key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_config(origin + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      bad_config(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) bad_config("cannot read config file " + path);
  return parse_config(f, path);
}

void check_config(const ExperimentConfig& c) {
  if (c.k_min < 2) bad_config("k_min must be at least 2");
  if (c.k_max < c.k_min) bad_config("k_max must be >= k_min");
  if (c.degrees.empty()) bad_config("degrees must not be empty");
  for (int d : c.degrees) {
    if (d < 1) bad_config("degrees must be positive");
  }
  if (c.trials < 1) bad_config("trials must be at least 1");
  if (!(c.tol > 0.0) || !std::isfinite(c.tol)) bad_config("tol must be a positive number");
  if (c.q < 1 || c.v < 1) bad_config("q and v must be positive");
  if (c.K < 2) bad_config("K must be at least 2");
  if (c.d < 1) bad_config("d must be at least 1");
  if (c.N && *c.N < 1) bad_config("N must be positive");
  if (c.cauchy_binet_trials < 1) bad_config("cauchy_binet_trials must be at least 1");
  for (const ProbePoint& p : c.probe_points) {
    if (p.K < 2 || p.d < 1 || p.N < 1) bad_config("probe points need K >= 2, d >= 1, N >= 1");
  }
}

// ---------------------------------------------------------------------------
// Sweep

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::CpaFeasible: return "CPA-feasible";
    case Classification::IndividualOnly: return "individual-only";
    case Classification::Infeasible: return "infeasible";
  }
  return "unknown";
}

Classification classify(int K, int d, int N) {
  if (N >= individual_threshold(K, d)) return Classification::IndividualOnly;
  if (N >= min_responses(K, d)) return Classification::CpaFeasible;
  return Classification::Infeasible;
}

std::vector<RegimeRow> run_sweep(const ExperimentConfig& config) {
  check_config(config);
  std::vector<ProbePoint> cells;
  for (int d : config.degrees) {
    for (int K = config.k_min; K <= config.k_max; ++K) {
      if (config.n_policy == NPolicy::NStarOnly) {
        cells.push_back({K, d, min_responses(K, d)});
      } else {
        for (int N = 1; N <= individual_threshold(K, d); ++N) cells.push_back({K, d, N});
      }
    }
  }

  std::vector<RegimeRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      rows[i] = sweep_cell(config, cells[i].K, cells[i].d, cells[i].N);
      spdlog::debug("sweep cell K={} d={} N={} done", cells[i].K, cells[i].d, cells[i].N);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }
  return rows;
}

void write_regime_csv(std::ostream& out, const std::vector<RegimeRow>& rows) {
  out << "K,d,N,N_star,individual_threshold,classification,mean_residual,mean_recovery_error,trials,certificate\n";
  for (const RegimeRow& r : rows) {
    out << r.K << ',' << r.d << ',' << r.N << ',' << r.N_star << ',' << r.individual_threshold << ','
        << to_string(r.classification) << ',' << fmt17(r.mean_residual.value_or(NAN)) << ','
        << fmt17(r.mean_recovery_error.value_or(NAN)) << ',' << r.trials << ',' << r.certificate << '\n';
  }
}

// ---------------------------------------------------------------------------
// Commands

int cmd_example1(const ExperimentConfig& config, std::ostream& log) {
  SystemParams params;
  params.K = 3;
  params.d = 1;
  params.N = 2;
  params.alpha = {-1.0, 0.0, 1.0};
  params.w = {-0.5, 1.0, 0.5};

  bool ok = true;
  const auto check = [&](bool cond, const std::string& what) {
    log << (cond ? "  ok    " : "  FAIL  ") << what << '\n';
    ok = ok && cond;
  };

  const ConstraintSystem sys = build_constraint_system(params);
  log << "U = [";
  for (std::size_t n = 0; n < sys.U.cols(); ++n) log << (n ? " " : "") << format_complex(sys.U(0, n), 6);
  log << "]\n";
  const CMatrix expected_u{{1.0, 1.0, 0.0}};
  check(sys.U.same_shape(expected_u) && (sys.U - expected_u).max_abs() <= 1e-12, "U = [1 1 0]");

  const CVector c{-0.0506, 0.0506, 0.5};
  const CpaScheme replay = scheme_from_coefficients(params, c);
  log << "c = (-0.0506, 0.0506, 0.5)\nP_form(z) = -0.0506 + 0.0506 z + 0.5 z^2\n";
  log << "roots = {" << format_complex(replay.beta[0], 6) << ", " << format_complex(replay.beta[1], 6) << "}\n";

  const CScalar r0{-0.37272, 0.0};
  const CScalar r1{0.27152, 0.0};
  const bool direct = std::abs(replay.beta[0] - r0) < 1e-3 && std::abs(replay.beta[1] - r1) < 1e-3;
  const bool swapped = std::abs(replay.beta[0] - r1) < 1e-3 && std::abs(replay.beta[1] - r0) < 1e-3;
  check(direct || swapped, "roots within 1e-3 of {-0.37272, 0.27152}");

  const double residual = orthogonality_residual(replay);
  log << "residual = " << fmt17(residual) << '\n';
  check(residual < 1e-12, "residual < 1e-12");
  check(check_feasibility(replay).verdict == Verdict::Feasible, "replayed scheme verifies as Feasible");

  Json report;
  report["U"] = complex_list(sys.U.data());
  report["c"] = complex_list(c);
  report["roots"] = complex_list(replay.beta);
  report["residual"] = residual;
  report["alternatives"] = Json::array();

  for (std::uint64_t seed : {config.seed, config.seed + 1, std::uint64_t{7}}) {
    const CpaScheme alt = construct_evaluation_points(params, seed);
    const double r = orthogonality_residual(alt);
    const double scale = residual_scale(alt);
    Rng rng(sub_seed(seed, {1}));
    const Dataset data = random_dataset(3, 1, 1, rng);
    const TaskSpec task{Poly({0.0, 1.0})};
    const double err = recovery_error(run_pipeline(data, task, alt), ground_truth(data, task, params.w));
    log << "seed " << seed << ": beta = {" << format_complex(alt.beta[0], 6) << ", "
        << format_complex(alt.beta[1], 6) << "}, residual " << fmt17(r) << ", recovery error " << fmt17(err)
        << '\n';
    check(check_feasibility(alt).verdict == Verdict::Feasible && r < 1e-9 * scale,
          "seed " + std::to_string(seed) + " scheme is feasible");
    check(err < config.tol, "seed " + std::to_string(seed) + " recovers the aggregate");
    report["alternatives"].push_back(Json{{"seed", seed},
                                          {"beta", complex_list(alt.beta)},
                                          {"residual", r},
                                          {"recovery_error", err}});
  }
  report["passed"] = ok;
  if (!config.out.empty()) write_output(config.out, report.dump(2) + "\n");
  return ok ? exit_code::kOk : exit_code::kAssertion;
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& log) {
  const std::vector<RegimeRow> rows = run_sweep(config);
  std::ostringstream csv;
  write_regime_csv(csv, rows);
  write_output(config.out, csv.str());

  int feasible = 0;
  int bad = 0;
  for (const RegimeRow& r : rows) {
    if (r.classification != Classification::CpaFeasible) continue;
    ++feasible;
    const bool row_ok = r.trials == config.trials && r.mean_recovery_error && *r.mean_recovery_error < config.tol;
    if (!row_ok) {
      ++bad;
      log << "  FAIL  K=" << r.K << " d=" << r.d << " N=" << r.N << ": " << r.certificate << ", mean error "
          << fmt17(r.mean_recovery_error.value_or(NAN)) << '\n';
    }
  }
  log << rows.size() << " cells, " << feasible << " CPA-feasible, " << bad << " above tolerance "
      << config.tol << '\n';
  return bad == 0 ? exit_code::kOk : exit_code::kAssertion;
}

int cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
  check_config(config);
  const int K = config.K;
  const int d = config.d;
  const int N = config.N.value_or(min_responses(K, d));
  const SystemParams params = random_params(K, d, N, sub_seed(config.seed, {0}));

  const bool individual = params.constraint_count() <= 0;
  const CpaScheme scheme = individual ? individual_decoding_scheme(params, sub_seed(config.seed, {1}))
                                      : construct_evaluation_points(params, sub_seed(config.seed, {1}));

  Rng rng(sub_seed(config.seed, {2}));
  const Dataset data = random_dataset(static_cast<std::size_t>(K), static_cast<std::size_t>(config.q),
                                      static_cast<std::size_t>(config.v), rng);
  const TaskSpec task = random_task(d, rng);

  SimConfig sim;
  sim.latency = config.max_latency > 0 ? LatencyModel::uniform(config.max_latency) : LatencyModel::zero();
  sim.seed = config.seed;
  sim.worker_count = static_cast<std::size_t>(N);
  sim.mode = config.single_threaded ? ExecutionMode::SingleThreaded : ExecutionMode::Threaded;
  sim.method = individual ? DecodeMethod::IndividualDecoding : DecodeMethod::CPA;
  const RunTrace trace = run_simulation(params, scheme, data, task, sim);

  AggregateResult reference;
  if (individual) {
    std::vector<WorkerResponse> responses;
    for (const EncodedShare& share : encode(data, scheme)) responses.push_back(worker_compute(share, task));
    reference = decode_individual(std::move(responses), scheme.beta, params).aggregate;
  } else {
    reference = run_pipeline(data, task, scheme);
  }

  const TraceReport validation = trace_validate(trace);
  const double err = recovery_error(trace.final, ground_truth(data, task, params.w));
  const double residual = individual ? 0.0 : orthogonality_residual(scheme) / residual_scale(scheme);
  const bool matches = trace.final.Y_hat == reference.Y_hat;

  const std::string trace_path = config.out.empty() ? "trace.jsonl" : config.out;
  std::ostringstream lines;
  write_trace_jsonl(lines, trace);
  write_output(trace_path, lines.str());

  Json summary;
  summary["K"] = K;
  summary["d"] = d;
  summary["N"] = N;
  summary["seed"] = config.seed;
  summary["method"] = individual ? "individual" : "cpa";
  summary["messages"] = trace.messages.size();
  summary["trace_valid"] = validation.valid;
  summary["violations"] = validation.violations;
  summary["relative_residual"] = residual;
  summary["recovery_error"] = err;
  summary["matches_pipeline"] = matches;
  write_output(trace_path + ".summary.json", summary.dump(2) + "\n");
  log << summary.dump(2) << '\n';

  const bool ok = validation.valid && trace.messages.size() == 2 * static_cast<std::size_t>(N) && matches &&
                  err < config.tol;
  return ok ? exit_code::kOk : exit_code::kAssertion;
}

int cmd_probe(const ExperimentConfig& config, std::ostream& log) {
  check_config(config);
  const std::vector<ProbePoint> points =
      config.probe_points.empty() ? default_probe_points(config) : config.probe_points;

  Json report;
  report["seed"] = config.seed;
  report["trials"] = config.trials;
  report["points"] = Json::array();
  bool all_one = true;
  for (const ProbePoint& p : points) {
    const ProbeReport r =
        genericity_probe(p.K, p.d, p.N, config.trials, sub_seed(config.seed, {u64(p.K), u64(p.d), u64(p.N)}));
    const Json row{{"K", p.K},
                   {"d", p.d},
                   {"N", p.N},
                   {"trials", r.trials},
                   {"constructed", r.fraction(r.constructed)},
                   {"leading_nonzero", r.fraction(r.leading_nonzero)},
                   {"disjoint", r.fraction(r.disjoint)},
                   {"distinct", r.fraction(r.distinct)}};
    report["points"].push_back(row);
    const bool one = r.constructed == r.trials && r.distinct == r.trials;
    all_one = all_one && one;
    log << "K=" << p.K << " d=" << p.d << " N=" << p.N << ": constructed " << r.fraction(r.constructed)
        << ", leading " << r.fraction(r.leading_nonzero) << ", disjoint " << r.fraction(r.disjoint)
        << ", distinct " << r.fraction(r.distinct) << '\n';
  }

  int agree = 0;
  double worst = 0.0;
  for (int t = 0; t < config.cauchy_binet_trials; ++t) {
    const SystemParams params = cauchy_binet_instance(sub_seed(config.seed, {0xcb, u64(t)}));
    const CauchyBinetResult r = cauchy_binet_check(params);
    if (r.agree) ++agree;
    worst = std::max(worst, std::abs(r.lhs - r.rhs) / (1.0 + std::abs(r.lhs)));
  }
  report["cauchy_binet"] = Json{{"instances", config.cauchy_binet_trials},
                                {"agree", agree},
                                {"fraction", static_cast<double>(agree) / config.cauchy_binet_trials},
                                {"worst_relative_gap", worst}};
  log << "Cauchy-Binet: " << agree << "/" << config.cauchy_binet_trials << " agree, worst relative gap "
      << fmt17(worst) << '\n';

  write_output(config.out, report.dump(2) + "\n");
  return all_one && agree == config.cauchy_binet_trials ? exit_code::kOk : exit_code::kAssertion;
}

}  // namespace cpa
