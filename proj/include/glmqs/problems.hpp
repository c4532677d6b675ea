#pragma once

#include <map>
#include <string>
#include <vector>

#include "glmqs/ode_system.hpp"

namespace glmqs {

// Stiff van der Pol oscillator in Lienard-type form:
//   y' = z,  z' = ((1 - y^2) z - y) / epsilon.
// The initial z is a truncated slow-manifold series; with epsilon = 1e-6 the
// off-manifold residue is amplified into enormous high derivatives, which the
// exact_derivatives hook reproduces (orders 0..4) for starting procedures.
struct VdpConfig {
  double epsilon = 1e-6;
  double t0 = 0.0;
  double T = 0.5;
};

// Viscous Burgers on [0, L] with homogeneous Dirichlet ends, discretized on
// M equispaced points (M - 2 interior unknowns, spacing k = L/(M-1)).
// Convection uses sign-aware first-order upwinding, diffusion second-order
// central differences. Initial profile sin(pi x / L).
struct BurgersConfig {
  double d = 0.1;
  double L = 1.0;
  int M = 10;
  double T = 1.0;
  double k() const { return L / (M - 1); }
};

// The v field starts at zero except inside a centered square of side L/4,
// where it is amplitude times a seeded uniform draw per cell; identical
// seeds give bitwise identical states.
struct GrayScottPerturbation {
  double amplitude = 0.1;
  unsigned long long seed = 0;
};

// Gray-Scott reaction-diffusion on the unit square, M x M cell-centered
// grid with reflective (zero normal derivative) boundaries, five-point
// Laplacian. State layout: all of u row-major, then all of v.
struct GrayScottConfig {
  double d1 = 2e-5;
  double d2 = 1e-5;
  double F = 0.04;
  double kappa = 0.06;
  double L = 1.0;
  int M = 32;
  double T = 1.0;
  GrayScottPerturbation perturbation;
  double k() const { return L / M; }
};

OdeSystem vdp_system(const VdpConfig& cfg = {});
OdeSystem burgers_system(const BurgersConfig& cfg = {});
OdeSystem grayscott_system(const GrayScottConfig& cfg = {});

// Scalar linear test problem y' = zeta * y, y(0) = 1.
OdeSystem dahlquist(double zeta);

// Augmented system tracking y(t) = 1 + t + ... + t^degree exactly; state is
// (y, t) with t' = 1. degree must lie in [0, 6].
OdeSystem polynomial(int degree);

// Prothero-Robinson problem y' = zeta (y - cos t) - sin t, exact solution
// cos t, in autonomous (y, t) form. Arbitrarily stiff without transients.
OdeSystem prothero_robinson(double zeta);

// Name-keyed factory used by the config file and CLI. Recognized params
// depend on the problem (epsilon, d, L, M, T, seed, amplitude, d1, d2, F,
// kappa, zeta, degree, t0); unknown keys raise ParseError.
OdeSystem make_problem(const std::string& name,
                       const std::map<std::string, std::string>& params = {});
std::vector<std::string> problem_names();

}  // namespace glmqs
