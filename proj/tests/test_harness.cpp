#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "glmqs/harness.hpp"
#include "glmqs/problems.hpp"

using namespace glmqs;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("observed order from an error pair") {
  CHECK(estimate_order(1.23e-4, 3.00e-5, 40, 80) == doctest::Approx(2.0356).epsilon(0.002));
  CHECK(estimate_order(1e-3, 1e-3, 10, 20) == 0.0);
  CHECK(estimate_order(2e-5, 1e-5, 10, 20) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(estimate_order(1e-2, 1e-4, 10, 100) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(estimate_order(0.0, 1e-5, 10, 20), Error);
  CHECK_THROWS_AS(estimate_order(1e-5, -1e-5, 10, 20), Error);
  CHECK_THROWS_AS(estimate_order(1e-4, 1e-5, 20, 20), Error);
  CHECK_THROWS_AS(estimate_order(1e-4, 1e-5, 20, 10), Error);
  CHECK_THROWS_AS(estimate_order(1e-4, 1e-5, 0, 10), Error);
}

TEST_CASE("endpoint reference: exact bypass and self-refinement") {
  const OdeSystem exact = dahlquist(-1.0);
  const auto re = reference_solution(exact, 0.0, 1.0);
  CHECK(re.exact);
  CHECK(re.source == "exact");
  CHECK(re.n_used == 0);
  CHECK(re.gap == 0.0);
  CHECK(re.y(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  OdeSystem blind = dahlquist(-1.0);
  blind.exact_solution = nullptr;
  blind.exact_derivatives = nullptr;
  const auto rs = reference_solution(blind, 0.0, 1.0);
  CHECK_FALSE(rs.exact);
  CHECK(rs.source == "self-refined");
  CHECK(rs.n_used >= 128);
  CHECK(rs.gap <= 1e-11);
  CHECK(std::abs(rs.y(0) - std::exp(-1.0)) <= 1e-9);
}

TEST_CASE("study specification parsing") {
  SUBCASE("full happy path") {
    std::stringstream in(
        "# study of the linear problem\n"
        "methods = GLMQS-1, GLMQS-2\n"
        "problem.name = dahlquist\n"
        "problem.zeta = -2.5\n"
        "study.N = 20, 40, 80\n"
        "study.norm = relative-L2\n"
        "study.t0 = 0.25\n"
        "study.T = 1.5\n"
        "output.dir = out-subdir\n"
        "newton.rel_tol = 1e-11\n"
        "newton.abs_tol = 1e-13\n"
        "newton.max_iters = 12\n"
        "newton.divergence_factor = 4\n"
        "jacobian.reuse = per-stage\n");
    const StudySpec spec = parse_study_spec(in, "inline");
    REQUIRE(spec.methods.size() == 2);
    CHECK(spec.methods[1] == "GLMQS-2");
    CHECK(spec.problem_name == "dahlquist");
    CHECK(spec.problem_params.at("zeta") == "-2.5");
    REQUIRE(spec.n_list.size() == 3);
    CHECK(spec.n_list[2] == 80);
    CHECK(spec.norm == StudySpec::Norm::relative_l2);
    CHECK(spec.t0 == 0.25);
    CHECK(spec.T == 1.5);
    CHECK(spec.output_dir == "out-subdir");
    CHECK(spec.newton.rel_tol == 1e-11);
    CHECK(spec.newton.abs_tol == 1e-13);
    CHECK(spec.newton.max_iters == 12);
    CHECK(spec.newton.divergence_factor == 4.0);
    CHECK(spec.newton.jacobian_reuse == NewtonConfig::JacobianReuse::per_stage);
  }

  SUBCASE("defaults when optional keys are absent") {
    std::stringstream in(
        "methods = GLMQS-1\n"
        "problem.name = vdp\n"
        "study.N = 40\n");
    const StudySpec spec = parse_study_spec(in, "inline");
    CHECK(spec.norm == StudySpec::Norm::absolute_l2);
    CHECK(spec.reference == "self");
    CHECK(std::isnan(spec.t0));
    CHECK(std::isnan(spec.T));
    CHECK(spec.output_dir == ".");
  }

  auto reject = [](const char* text) {
    std::stringstream in(text);
    CHECK_THROWS_AS(parse_study_spec(in, "inline"), ParseError);
  };

  SUBCASE("unknown key") {
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 40\nstudy.step = 7\n");
  }
  SUBCASE("duplicate key") {
    reject("methods = GLMQS-1\nmethods = GLMQS-2\nproblem.name = vdp\nstudy.N = 40\n");
  }
  SUBCASE("missing required keys") {
    reject("problem.name = vdp\nstudy.N = 40\n");
    reject("methods = GLMQS-1\nstudy.N = 40\n");
    reject("methods = GLMQS-1\nproblem.name = vdp\n");
  }
  SUBCASE("step counts must increase") {
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 40, 40\n");
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 80, 40\n");
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 0, 40\n");
  }
  SUBCASE("unparseable values") {
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = ten\n");
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 40\nstudy.norm = L-infinity\n");
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 40\nnewton.max_iters = 2.5\n");
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 40\njacobian.reuse = sometimes\n");
    reject("methods = GLMQS-1\nproblem.name = vdp\nstudy.N = 40\nbroken line\n");
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_study_file("no/such/study.conf"), ParseError);
  }
}

TEST_CASE("a small study reproduces nominal orders on the linear problem") {
  StudySpec spec;
  spec.methods = {"GLMQS-1", "GLMQS-2", "GLMQS-3", "GLMQS-4"};
  spec.problem_name = "dahlquist";
  spec.problem_params["zeta"] = "-2";
  spec.n_list = {80, 160};

  const StudyResult result = run_study(spec);
  REQUIRE(result.rows.size() == 8);
  CHECK(result.reference.exact);

  for (size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    CAPTURE(row.method);
    CHECK_FALSE(row.failed);
    CHECK(row.error > 0.0);
    CHECK(row.h == doctest::Approx(1.0 / row.N).epsilon(1e-15));
    const int p = row.method.back() - '0';
    if (i % 2 == 1) {
      // Second N of each method pairs with the first for a slope. The order-3
      // member's error constant is ~8e-10, so its leading error term is the
      // order-4 one at any practical step size; expect the observed slope
      // near 4 for it and near the nominal order for the others.
      if (p == 3)
        CHECK(row.observed_p == doctest::Approx(4.0).epsilon(0.15));
      else
        CHECK(row.observed_p == doctest::Approx(double(p)).epsilon(0.1));
      CHECK(result.rows[i - 1].error > row.error);
    } else {
      CHECK(std::isnan(row.observed_p));
    }
  }

  // The report carries the resolved configuration and per-method summaries.
  CHECK(result.report.find("study.norm = absolute-L2") != std::string::npos);
  CHECK(result.report.find("reference.source = exact") != std::string::npos);
  CHECK(result.report.find("GLMQS-4.finest_N = 160") != std::string::npos);
}

TEST_CASE("norms, supplied references, and failure capture") {
  SUBCASE("relative error equals absolute over the reference norm") {
    StudySpec abs_spec;
    abs_spec.methods = {"GLMQS-2"};
    abs_spec.problem_name = "dahlquist";
    abs_spec.problem_params["zeta"] = "-5";
    abs_spec.n_list = {40};

    StudySpec rel_spec = abs_spec;
    rel_spec.norm = StudySpec::Norm::relative_l2;

    const double abs_err = run_study(abs_spec).rows[0].error;
    const double rel_err = run_study(rel_spec).rows[0].error;
    CHECK(rel_err == doctest::Approx(abs_err / std::exp(-5.0)).epsilon(1e-12));
  }

  SUBCASE("reference from a file") {
    const std::string path = "refvalue.txt";
    {
      std::ofstream out(path);
      out << "0.006737946999085467\n";  // e^-5
    }
    StudySpec spec;
    spec.methods = {"GLMQS-2"};
    spec.problem_name = "dahlquist";
    spec.problem_params["zeta"] = "-5";
    spec.n_list = {40};
    spec.reference = path;

    const StudyResult result = run_study(spec);
    CHECK(result.reference.source == path);
    CHECK_FALSE(result.reference.exact);
    // Same endpoint as the exact bypass, so essentially the same error.
    StudySpec self = spec;
    self.reference = "self";
    CHECK(result.rows[0].error ==
          doctest::Approx(run_study(self).rows[0].error).epsilon(1e-8));
    std::remove(path.c_str());

    spec.reference = "no/such/file.txt";
    CHECK_THROWS_AS(run_study(spec), ParseError);
  }

  SUBCASE("per-cell failures leave other cells intact") {
    const std::string path = "vdpref.txt";
    {
      std::ofstream out(path);
      out << "1.0 -1.0\n";  // placeholder endpoint; every cell fails anyway
    }
    StudySpec spec;
    spec.methods = {"GLMQS-2"};
    spec.problem_name = "vdp";
    spec.n_list = {40, 80};
    spec.reference = path;
    // One iteration per stage cannot converge the stiff nonlinear stages.
    spec.newton.max_iters = 1;
    const StudyResult result = run_study(spec);
    std::remove(path.c_str());
    REQUIRE(result.rows.size() == 2);
    for (const auto& row : result.rows) {
      CHECK(row.failed);
      CHECK_FALSE(row.failure.empty());
      CHECK(std::isnan(row.observed_p));
    }
    CHECK(result.report.find("all runs failed") != std::string::npos);
    CHECK(result.report.find("GLMQS-2.N40.failure") != std::string::npos);
  }
}

TEST_CASE("study outputs are complete and reproducible") {
  StudySpec spec;
  spec.methods = {"GLMQS-1", "GLMQS-3"};
  spec.problem_name = "dahlquist";
  spec.problem_params["zeta"] = "-1";
  spec.n_list = {20, 40};
  spec.output_dir = "study-out-test";

  const StudyResult result = run_study(spec);
  write_study_outputs(spec, result);

  const std::string csv = slurp("study-out-test/convergence.csv");
  CHECK(csv.find("# methods = GLMQS-1,GLMQS-3") != std::string::npos);
  CHECK(csv.find("method,N,h,error,observed_p") != std::string::npos);
  CHECK(csv.find("GLMQS-3,40,") != std::string::npos);

  const std::string loglog = slurp("study-out-test/loglog.csv");
  CHECK(loglog.find("method,log10_h,log10_error") != std::string::npos);
  // Four successful rows, one data line each plus the header.
  int lines = 0;
  for (char ch : loglog)
    if (ch == '\n') ++lines;
  CHECK(lines >= 5);

  CHECK(slurp("study-out-test/report.txt") == result.report);

  // Re-running the identical study writes byte-identical files.
  const StudyResult again = run_study(spec);
  write_study_outputs(spec, again);
  CHECK(slurp("study-out-test/convergence.csv") == csv);
  CHECK(slurp("study-out-test/report.txt") == result.report);

  // Thread-pool sizing must not affect the numbers.
  setenv("GLMQS_THREADS", "1", 1);
  const StudyResult serial = run_study(spec);
  unsetenv("GLMQS_THREADS");
  write_study_outputs(spec, serial);
  CHECK(slurp("study-out-test/convergence.csv") == csv);

  std::remove("study-out-test/convergence.csv");
  std::remove("study-out-test/loglog.csv");
  std::remove("study-out-test/report.txt");
  std::remove("study-out-test");
}

TEST_CASE("study guards") {
  StudySpec spec;
  spec.methods = {"GLMQS-1"};
  spec.problem_name = "dahlquist";
  spec.n_list = {20};
  spec.t0 = 1.0;
  spec.T = 0.5;
  CHECK_THROWS_AS(run_study(spec), Error);

  spec.t0 = 0.0;
  spec.T = 1.0;
  spec.methods = {"GLMQS-9"};
  CHECK_THROWS_AS(run_study(spec), Error);

  spec.methods = {"GLMQS-1"};
  spec.problem_name = "heat";
  CHECK_THROWS_AS(run_study(spec), ParseError);
}
