#include "glmqs/stability.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

namespace glmqs {

namespace {

// Characteristic polynomial coefficients (ascending, length r+1, leading 1)
// from the spectrum. Building the polynomial from eigenvalues keeps the tiny
// trailing coefficients free of the cancellation a trace-based recursion
// would suffer when the matrix has large entries but a near-nilpotent part.
std::vector<Complex> charpoly_from_eigenvalues(const CMat& m) {
  Eigen::ComplexEigenSolver<CMat> es(m, /*computeEigenvectors=*/false);
  const auto& eig = es.eigenvalues();
  std::vector<Complex> coef{Complex(1.0, 0.0)};
  for (int i = 0; i < eig.size(); ++i) {
    std::vector<Complex> next(coef.size() + 1, Complex(0.0, 0.0));
    for (size_t k = 0; k < coef.size(); ++k) {
      next[k + 1] += coef[k];
      next[k] -= eig(i) * coef[k];
    }
    coef = std::move(next);
  }
  // coef[k] multiplies eta^k; leading coef[r] = 1.
  return coef;
}

QuadraticFormCheck check_quadratic_form_impl(const GlmTableau& t, int samples,
                                             double tol) {
  QuadraticFormCheck res;
  res.ok = true;
  res.worst_spurious = 0.0;
  res.worst_w = Complex(0, 0);
  const int need = t.r - 2;
  for (int i = 0; i < samples; ++i) {
    // Deterministic sweep of the closed left half-plane: moduli log-spaced
    // in [1e-2, 1e2], arguments covering [pi/2, 3pi/2].
    const double u = (samples == 1) ? 0.5 : static_cast<double>(i) / (samples - 1);
    const double modulus = std::pow(10.0, -2.0 + 4.0 * u);
    const double arg = M_PI * (0.5 + std::fmod(7.0 * u, 1.0));
    const Complex w = std::polar(modulus, arg);
    const CMat M = stability_matrix(t, w);
    Eigen::ComplexEigenSolver<CMat> es(M, false);
    Vec mags = es.eigenvalues().cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size());
    const double spurious = (need > 0) ? mags(need - 1) : 0.0;
    if (spurious > res.worst_spurious) {
      res.worst_spurious = spurious;
      res.worst_w = w;
    }
    if (spurious > tol) res.ok = false;
  }
  return res;
}

}  // namespace

CMat stability_matrix(const GlmTableau& t, Complex w) {
  const int s = t.s;
  const Complex diag = 1.0 - w * t.lambda;
  if (std::abs(diag) < 1e-12)
    throw DomainError("stability matrix evaluated at the pole w = 1/lambda");
  // Z = (I - w A)^{-1} U via forward substitution.
  CMat Z(s, t.r);
  for (int j = 0; j < t.r; ++j) {
    for (int i = 0; i < s; ++i) {
      Complex acc = t.U(i, j);
      for (int k = 0; k < i; ++k) acc += w * t.A(i, k) * Z(k, j);
      Z(i, j) = acc / diag;
    }
  }
  return t.V.cast<Complex>() + w * t.B.cast<Complex>() * Z;
}

Mat stability_matrix_at_infinity(const GlmTableau& t) {
  // w (I - w A)^{-1} -> -A^{-1}; A is lower triangular with diagonal lambda.
  Mat Z(t.s, t.r);  // Z = A^{-1} U
  for (int j = 0; j < t.r; ++j) {
    for (int i = 0; i < t.s; ++i) {
      double acc = t.U(i, j);
      for (int k = 0; k < i; ++k) acc -= t.A(i, k) * Z(k, j);
      Z(i, j) = acc / t.lambda;
    }
  }
  return t.V - t.B * Z;
}

double spectral_radius(const CMat& m) {
  Eigen::ComplexEigenSolver<CMat> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const Mat& m) { return spectral_radius(CMat(m.cast<Complex>())); }

StabilityPolynomial stability_polynomial(const GlmTableau& t, bool enforce,
                                         double spurious_tol) {
  validate_tableau(t);
  const int r = t.r;
  const int nsamp = 2 * r + 1;
  // Real samples on the negative axis, away from the pole at 1/lambda > 0.
  std::vector<double> ws(nsamp);
  for (int j = 0; j < nsamp; ++j) {
    const double theta = M_PI * (2.0 * j + 1.0) / (2.0 * nsamp);
    ws[j] = -1.11 - 1.09 * std::cos(theta);  // Chebyshev points in [-2.2, -0.02]
  }

  // q(k, j) = coefficient of eta^k at sample j, scaled by (1 - lambda w)^r.
  Mat q(r + 1, nsamp);
  for (int j = 0; j < nsamp; ++j) {
    const CMat M = stability_matrix(t, Complex(ws[j], 0.0));
    const auto coef = charpoly_from_eigenvalues(M);
    const double scale = std::pow(1.0 - t.lambda * ws[j], r);
    for (int k = 0; k <= r; ++k) q(k, j) = scale * coef[k].real();
  }

  // Fit each eta-coefficient as a degree-r polynomial in w (least squares).
  Mat vand(nsamp, r + 1);
  for (int j = 0; j < nsamp; ++j) {
    double pw = 1.0;
    for (int d = 0; d <= r; ++d) {
      vand(j, d) = pw;
      pw *= ws[j];
    }
  }
  const auto qr = vand.colPivHouseholderQr();
  Mat fitted(r + 1, r + 1);  // row k: ascending w-coefficients of eta^k
  for (int k = 0; k <= r; ++k) fitted.row(k) = qr.solve(q.row(k).transpose()).transpose();

  StabilityPolynomial out;
  out.r = r;
  out.leading_power = r - 2;
  out.quad_leading = Vec(r + 1);
  double binom = 1.0;
  for (int d = 0; d <= r; ++d) {
    out.quad_leading(d) = binom * std::pow(-t.lambda, d);
    binom = binom * (r - d) / (d + 1.0);
  }
  out.fit_residual = (fitted.row(r).transpose() - out.quad_leading).cwiseAbs().maxCoeff();
  out.p1 = -fitted.row(r - 1).transpose();
  out.p0 = fitted.row(r - 2).transpose();
  out.spurious_max = 0.0;
  for (int k = 0; k < r - 2; ++k)
    out.spurious_max = std::max(out.spurious_max, fitted.row(k).cwiseAbs().maxCoeff());
  if (enforce && out.spurious_max > spurious_tol)
    throw StructureError("tableau '" + t.name +
                         "': stability polynomial is not of quadratic type "
                         "(spurious coefficient " +
                         std::to_string(out.spurious_max) + ")");
  return out;
}

QuadraticFormCheck check_quadratic_form(const GlmTableau& t, int samples, double tol) {
  validate_tableau(t);
  return check_quadratic_form_impl(t, samples, tol);
}

AStabilityScan scan_a_stability(const GlmTableau& t, int grid_points, double y_min,
                                double y_max, double tol, bool keep_samples) {
  validate_tableau(t);
  if (grid_points < 1) throw Error("a-stability scan needs at least one grid point");
  AStabilityScan scan;
  scan.tol = tol;
  const int half = (grid_points + 1) / 2;
  std::vector<double> ys;
  ys.reserve(2 * half);
  for (int i = 0; i < half; ++i) {
    const double f = (half == 1) ? 0.0 : static_cast<double>(i) / (half - 1);
    const double y = y_min * std::pow(y_max / y_min, f);
    ys.push_back(y);
    ys.push_back(-y);
  }
  ys.resize(grid_points);
  scan.worst_radius = 0.0;
  for (double y : ys) {
    const double rho = spectral_radius(stability_matrix(t, Complex(0.0, y)));
    if (keep_samples) {
      scan.grid_y.push_back(y);
      scan.grid_radius.push_back(rho);
    }
    if (rho > scan.worst_radius) {
      scan.worst_radius = rho;
      scan.worst_y = y;
    }
  }
  scan.radius_at_infinity = spectral_radius(stability_matrix_at_infinity(t));
  scan.a_stable = scan.worst_radius <= 1.0 + tol && scan.radius_at_infinity <= 1.0 + tol;
  return scan;
}

LStabilityCheck check_l_stability(const GlmTableau& t, double radius_tol) {
  validate_tableau(t);
  LStabilityCheck chk;
  chk.radius_tol = radius_tol;
  chk.radius_at_infinity = spectral_radius(stability_matrix_at_infinity(t));
  chk.radius_ok = chk.radius_at_infinity <= radius_tol;
  const auto poly = stability_polynomial(t, /*enforce=*/false);
  chk.p1_top = poly.p1(t.r);
  chk.p0_top = poly.p0(t.r);
  // Tolerance tied to the printed precision of the coefficients, scaled by
  // the magnitude of B (the leading coefficients are contractions of B).
  chk.coeff_tol = order_residual_tolerance(t) * std::max(1.0, t.B.cwiseAbs().maxCoeff());
  chk.coeff_ok = std::abs(chk.p1_top) <= chk.coeff_tol && std::abs(chk.p0_top) <= chk.coeff_tol;
  chk.l_stable = chk.radius_ok && chk.coeff_ok;
  return chk;
}

}  // namespace glmqs
