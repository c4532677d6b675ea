#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "glmqs/integrator.hpp"
#include "glmqs/ode_system.hpp"

namespace glmqs {

// log(e1/e2) / log(N2/N1). Errors must be positive and N2 > N1.
double estimate_order(double e1, double e2, long N1, long N2);

struct ReferenceResult {
  Vec y;
  double gap = 0.0;  // relative agreement across the final doubling
  long n_used = 0;   // step count of the accepted run (0 for exact/supplied)
  bool exact = false;
  std::string source;  // "exact", "self-refined", or the supplied file path
};

// Endpoint reference: the exact solution when the problem carries one,
// otherwise the order-4 method refined by doubling N from 64 until two
// successive endpoints agree to 1e-11 relative (N capped at 2^20, beyond
// which ReferenceFailure reports the gap actually achieved).
ReferenceResult reference_solution(const OdeSystem& sys, double t0, double T,
                                   const NewtonConfig& cfg = {});

struct StudySpec {
  std::vector<std::string> methods;  // built-in names or tableau file paths
  std::string problem_name;
  std::map<std::string, std::string> problem_params;
  std::vector<long> n_list;
  enum class Norm { absolute_l2, relative_l2 };
  Norm norm = Norm::absolute_l2;
  std::string reference = "self";  // "self" or a path to a state file
  double t0 = std::numeric_limits<double>::quiet_NaN();  // NaN: problem default
  double T = std::numeric_limits<double>::quiet_NaN();
  std::string output_dir = ".";
  NewtonConfig newton;
};

// Flat key = value study configuration ('#' starts a comment). Unknown keys
// are rejected so typos cannot silently fall back to defaults.
StudySpec parse_study_spec(std::istream& in, const std::string& origin);
StudySpec parse_study_file(const std::string& path);

struct ConvergenceRow {
  std::string method;
  long N = 0;
  double h = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();
  double observed_p = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string failure;
};

struct StudyResult {
  std::vector<ConvergenceRow> rows;  // grouped by method, ascending N
  ReferenceResult reference;
  std::string report;  // key-value summary, same text as report.txt
};

// Runs every (method, N) cell against one shared reference. Cells run on a
// thread pool sized by GLMQS_THREADS (hardware default); individual cell
// failures are recorded in their row and the study continues.
StudyResult run_study(const StudySpec& spec);

// Writes convergence.csv, loglog.csv, and report.txt into spec.output_dir,
// each embedding the resolved configuration as '#' header lines. Output is
// byte-identical for identical spec and seed.
void write_study_outputs(const StudySpec& spec, const StudyResult& result);

int cli_main(int argc, char** argv);

}  // namespace glmqs
