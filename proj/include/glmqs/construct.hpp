#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "glmqs/tableau.hpp"

namespace glmqs {

// Free parameters of the constructible families: lambda plus named first-row
// V entries ("v12" for p = 1, "v13" for p = 2). bounds carries a [lo, hi]
// box per parameter name; when present, parameters must lie inside it.
struct FreeParameterSet {
  double lambda = 0.0;
  std::map<std::string, double> v_free;
  std::map<std::string, std::pair<double, double>> bounds;
};

// One certification gate: the measured value and the tolerance it was held
// to. Informational lines (no gate) carry tol = 0 and pass = true.
struct CheckLine {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tol = 0.0;
  std::string detail;
};

// One optimizer evaluation: parameter point, |E| reached (NaN if assembly
// failed there), and whether the point satisfied the hard constraints.
struct TraceEntry {
  double lambda = 0.0;
  double v = 0.0;
  double E = 0.0;
  bool feasible = false;
  std::string note;
};

struct ConstructionResult {
  GlmTableau tableau;
  double E = 0.0;  // signed leading error coefficient
  bool feasible = false;
  double worst_boundary_radius = 0.0;
  double radius_at_infinity = 0.0;
  std::vector<TraceEntry> optimizer_trace;
  std::vector<CheckLine> checks;
  bool all_checks_pass() const;
};

// Builds the order-p member at the given (lambda, v) point: c uniform, A
// lower triangular with diagonal lambda and strict lower part 1/p, U from
// the stage conditions, then B, remaining V entries, and the X last column
// from the output conditions + structural commutation rows + the two
// vanishing top stability coefficients. Order 1 is solved in closed form
// (the defining system is linear on its root branch); order 2 by damped
// Gauss-Newton from deterministic starts. Success requires residual <= 1e-10.
GlmTableau assemble_from_parameters(int p, const FreeParameterSet& params);

// Derivative-free minimization of |E| over the (lambda, v) box: 25x25
// midpoint screening grid, then compass pattern search. Hard constraints:
// assembly succeeds and the boundary scan certifies radius <= 1 + 1e-8.
// The result's feasible flag additionally demands rho(M(inf)) <= 1e-6.
ConstructionResult optimize_error_constant(int p, const FreeParameterSet& bounds);

// Full verification of a built-in method: order-condition residuals, the
// structural commutation certificate, quadratic-form check, boundary scan,
// limit-damping evidence, and the error constant against the published
// value. Failed checks are reported in `checks`, never thrown.
ConstructionResult certify_published(const std::string& name);

// The check battery itself, applicable to any tableau (the CLI runs it on
// files as well as built-ins). Gates scale with the tableau's coeff_digits.
std::vector<CheckLine> verification_checks(const GlmTableau& t);

}  // namespace glmqs
