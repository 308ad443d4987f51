#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpa/experiments.hpp"
#include "fixtures.hpp"

using namespace cpa;
using fixture::code_of;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cpa-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("key = value lines with comments") {
    std::istringstream in(
        "# regime map\n"
        "k_min = 4\n"
        "k-max = 6   # dashes work too\n"
        "degrees = 1, 3\n"
        "n_policy = nstar\n"
        "seed = 99\n"
        "tol = 1e-8\n"
        "probe_points = 4:1:2, 5:2:5\n"
        "single_threaded = true\n");
    const ExperimentConfig c = parse_config(in);
    CHECK(c.k_min == 4);
    CHECK(c.k_max == 6);
    CHECK(c.degrees == std::vector<int>{1, 3});
    CHECK(c.n_policy == NPolicy::NStarOnly);
    CHECK(c.seed == 99);
    CHECK(c.tol == 1e-8);
    REQUIRE(c.probe_points.size() == 2);
    CHECK(c.probe_points[1].N == 5);
    CHECK(c.single_threaded);
  }

  TEST_CASE("defaults cover the regime map axes") {
    const ExperimentConfig c;
    CHECK(c.k_min == 3);
    CHECK(c.k_max == 10);
    CHECK(c.degrees == std::vector<int>{1, 2});
    CHECK_NOTHROW(check_config(c));
  }

  TEST_CASE("malformed input is an invalid config") {
    std::istringstream unknown("colour = blue\n");
    CHECK(code_of([&] { parse_config(unknown); }) == ErrorCode::InvalidConfig);
    std::istringstream no_eq("k_min 3\n");
    CHECK(code_of([&] { parse_config(no_eq); }) == ErrorCode::InvalidConfig);
    ExperimentConfig c;
    CHECK(code_of([&] { apply_setting(c, "trials", "3x"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { apply_setting(c, "n_policy", "some"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { apply_setting(c, "probe_points", "4:1"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { parse_int_list(" , "); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { load_config("/nonexistent/cpa.conf"); }) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("range checks") {
    ExperimentConfig c;
    c.trials = 0;
    CHECK(code_of([&] { check_config(c); }) == ErrorCode::InvalidConfig);
    c = {};
    c.k_max = 2;
    CHECK(code_of([&] { check_config(c); }) == ErrorCode::InvalidConfig);
    c = {};
    c.degrees.clear();
    CHECK(code_of([&] { check_config(c); }) == ErrorCode::InvalidConfig);
    c = {};
    c.tol = -1.0;
    CHECK(code_of([&] { check_config(c); }) == ErrorCode::InvalidConfig);
  }
}

TEST_SUITE("sweep") {
  TEST_CASE("classification follows the thresholds") {
    CHECK(classify(3, 1, 1) == Classification::Infeasible);
    CHECK(classify(3, 1, 2) == Classification::CpaFeasible);
    CHECK(classify(3, 1, 3) == Classification::IndividualOnly);
    CHECK(classify(5, 2, 4) == Classification::Infeasible);
    CHECK(classify(5, 2, 8) == Classification::CpaFeasible);
    CHECK(classify(5, 2, 9) == Classification::IndividualOnly);
  }

  TEST_CASE("N* column for d=1 and d=2") {
    ExperimentConfig c;
    c.k_min = 3;
    c.k_max = 8;
    c.n_policy = NPolicy::NStarOnly;
    c.trials = 2;
    const std::vector<RegimeRow> rows = run_sweep(c);
    std::vector<int> d1, d2;
    for (const RegimeRow& r : rows) (r.d == 1 ? d1 : d2).push_back(r.N_star);
    CHECK(d1 == std::vector<int>{2, 2, 3, 3, 4, 4});  // floor((K-1)/2) + 1
    CHECK(d2 == std::vector<int>{3, 4, 5, 6, 7, 8});
  }

  TEST_CASE("full grid: boundaries, certificates and recovery") {
    ExperimentConfig c;
    c.k_min = 3;
    c.k_max = 7;
    c.trials = 3;
    for (const RegimeRow& r : run_sweep(c)) {
      CAPTURE(r.K);
      CAPTURE(r.d);
      CAPTURE(r.N);
      const bool cpa = r.N_star <= r.N && r.N <= r.d * (r.K - 1);
      const bool individual = r.N >= r.d * (r.K - 1) + 1;
      CHECK((r.classification == Classification::CpaFeasible) == cpa);
      CHECK((r.classification == Classification::IndividualOnly) == individual);
      if (cpa) {
        REQUIRE(r.mean_recovery_error);
        CHECK(*r.mean_recovery_error < 1e-6);
        CHECK(r.certificate == "Feasible");
      } else if (individual) {
        REQUIRE(r.mean_recovery_error);
        CHECK(*r.mean_recovery_error < 1e-8);
      } else if (r.N >= 2) {
        CHECK((r.certificate == "InfeasibleCgeK" || r.certificate == "InfeasibleTrivialKernel"));
      }
    }
  }

  TEST_CASE("CSV is deterministic and uses the fixed header") {
    ExperimentConfig c;
    c.k_min = 3;
    c.k_max = 5;
    c.trials = 2;
    std::ostringstream a, b;
    write_regime_csv(a, run_sweep(c));
    write_regime_csv(b, run_sweep(c));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("K,d,N,N_star,individual_threshold,classification,mean_residual,mean_recovery_error,trials,"
                        "certificate\n",
                        0) == 0);
    CHECK(a.str().find("3,1,1,2,3,infeasible,nan,nan,0,OutOfRegime\n") != std::string::npos);
  }
}

TEST_SUITE("commands") {
  TEST_CASE("example1 passes its own assertions") {
    ExperimentConfig c;
    c.out = scratch("example1.json").string();
    std::ostringstream log;
    CHECK(cmd_example1(c, log) == exit_code::kOk);
    CHECK(log.str().find("FAIL") == std::string::npos);
    CHECK(slurp(c.out).find("\"passed\": true") != std::string::npos);
  }

  TEST_CASE("simulate K=3, d=1, N=2 writes four messages, twice identically") {
    ExperimentConfig c;
    c.K = 3;
    c.d = 1;
    c.N = 2;
    c.seed = 1;
    c.tol = 1e-9;
    c.max_latency = 3;
    c.out = scratch("sim-a.jsonl").string();
    std::ostringstream log;
    REQUIRE(cmd_simulate(c, log) == exit_code::kOk);
    const std::string first = slurp(c.out);
    CHECK(std::count(first.begin(), first.end(), '\n') == 4);
    c.out = scratch("sim-b.jsonl").string();
    REQUIRE(cmd_simulate(c, log) == exit_code::kOk);
    CHECK(slurp(c.out) == first);
    CHECK(slurp(c.out + ".summary.json").find("\"messages\": 4") != std::string::npos);
  }

  TEST_CASE("simulate below the constraint bound surfaces the certificate") {
    ExperimentConfig c;
    c.K = 3;
    c.d = 2;
    c.N = 2;
    c.out = scratch("sim-bad.jsonl").string();
    std::ostringstream log;
    CHECK(code_of([&] { cmd_simulate(c, log); }) == ErrorCode::InfeasibleCgeK);
  }

  TEST_CASE("probe at two regime points") {
    ExperimentConfig c;
    c.trials = 20;
    c.cauchy_binet_trials = 20;
    c.probe_points = {{4, 1, 2}, {5, 2, 5}};
    c.out = scratch("probe.json").string();
    std::ostringstream log;
    CHECK(cmd_probe(c, log) == exit_code::kOk);
    CHECK(slurp(c.out).find("\"distinct\": 1.0") != std::string::npos);
  }

  TEST_CASE("unwritable output") {
    ExperimentConfig c;
    c.k_min = 3;
    c.k_max = 3;
    c.out = "/nonexistent-dir/map.csv";
    std::ostringstream log;
    CHECK(code_of([&] { cmd_sweep(c, log); }) == ErrorCode::InvalidConfig);
  }
}
