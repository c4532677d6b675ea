#pragma once

#include <complex>

#include "glmqs/tableau.hpp"

namespace glmqs {

using Complex = std::complex<double>;

// Evaluation point sits on the pole of (I - w A)^{-1} (w = 1/lambda).
struct DomainError : Error {
  using Error::Error;
};

// M(w) = V + w B (I - w A)^{-1} U, by forward substitution on the lower
// triangular I - w A. Throws DomainError within ~1e-12 of the pole.
CMat stability_matrix(const GlmTableau& t, Complex w);

// Limit w -> inf: M(inf) = V - B A^{-1} U.
Mat stability_matrix_at_infinity(const GlmTableau& t);

double spectral_radius(const CMat& m);
double spectral_radius(const Mat& m);

// p(eta, w) = (1 - lambda w)^r det(eta I - M(w)), recovered by evaluating at
// 2r+1 real w samples and fitting each eta-coefficient as a degree-r
// polynomial in w. For the quadratic-structure methods
//   p = eta^(r-2) ( (1 - lambda w)^r eta^2 - p1(w) eta + p0(w) ),
// so the eta^k coefficients with k < r-2 vanish; spurious_max is the largest
// fitted magnitude among them. With enforce=true a spurious_max above
// spurious_tol throws StructureError.
struct StabilityPolynomial {
  int r = 0;
  int leading_power = 0;  // r - 2
  Vec quad_leading;       // (1 - lambda w)^r, ascending in w, length r+1
  Vec p1;                 // ascending, length r+1, p1(0) = 1
  Vec p0;                 // ascending, length r+1, p0(0) = 0
  double spurious_max = 0.0;
  double fit_residual = 0.0;  // fitted leading coefficient vs exact binomial
};
StabilityPolynomial stability_polynomial(const GlmTableau& t, bool enforce = true,
                                         double spurious_tol = 1e-6);

// Deterministic sweep of the closed left half-plane: counts eigenvalues of
// magnitude <= tol ("spurious roots") at each sample; ok requires at least
// r-2 of them everywhere. worst_spurious is the largest over samples of the
// (r-2)-th smallest eigenvalue magnitude (0 when r = 2).
struct QuadraticFormCheck {
  bool ok = false;
  double worst_spurious = 0.0;
  Complex worst_w;
};
QuadraticFormCheck check_quadratic_form(const GlmTableau& t, int samples = 100,
                                        double tol = 1e-6);

// rho(M(i y)) on a symmetric log-spaced grid plus the w -> inf limit.
struct AStabilityScan {
  bool a_stable = false;
  double worst_radius = 0.0;
  double worst_y = 0.0;
  double radius_at_infinity = 0.0;
  double tol = 0.0;  // acceptance threshold used: rho <= 1 + tol
  std::vector<double> grid_y;       // sample locations (when requested)
  std::vector<double> grid_radius;  // rho at each sample
};
AStabilityScan scan_a_stability(const GlmTableau& t, int grid_points = 2048,
                                double y_min = 1e-6, double y_max = 1e9,
                                double tol = 1e-8, bool keep_samples = false);

// Dual evidence for L-stability: (a) rho(M(inf)) below radius_tol, and
// (b) vanishing leading stability coefficients p1[r], p0[r] below a tolerance
// tied to the coefficient precision of the tableau.
struct LStabilityCheck {
  bool l_stable = false;
  bool radius_ok = false;
  bool coeff_ok = false;
  double radius_at_infinity = 0.0;
  double p1_top = 0.0;
  double p0_top = 0.0;
  double radius_tol = 0.0;
  double coeff_tol = 0.0;
};
LStabilityCheck check_l_stability(const GlmTableau& t, double radius_tol = 1e-6);

}  // namespace glmqs
