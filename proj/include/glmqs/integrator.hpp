#pragma once

#include <vector>

#include "glmqs/newton.hpp"
#include "glmqs/ode_system.hpp"
#include "glmqs/tableau.hpp"

namespace glmqs {

// External state of the method: r blocks, block j carrying h^j y^(j)(t)
// (exact scaled Taylor data for polynomial solutions of degree < r).
struct NordsieckState {
  double t = 0.0;
  double h = 0.0;
  std::vector<Vec> blocks;
};

struct IntegrationStats {
  long steps = 0;
  long newton_iters = 0;
  long jacobian_refreshes = 0;
  long factorizations = 0;
  long rhs_evals = 0;
};

struct IntegrationResult {
  Vec y_end;                         // block 0 at the end point
  std::vector<NordsieckState> states;  // filled only when requested
  IntegrationStats stats;
};

struct IntegrateOptions {
  NewtonConfig newton;
  bool store_trajectory = false;
};

// Self-starting L-stable one-step kernel (five-stage singly diagonally
// implicit, order four, stiffly accurate) advancing y0 from t0 to t1 in
// nsteps equal steps. Used for the reference values the starting procedure
// interpolates, and available to tests.
Vec sdirk4_solve(const OdeSystem& sys, double t0, const Vec& y0, double t1, long nsteps,
                 const NewtonConfig& cfg = {});

// Builds the starting Nordsieck vector at t0. With exact_derivatives present
// the blocks are direct scaled derivatives. Otherwise reference values at the
// p+1 equally spaced nodes t0 + i h (computed by the tight-tolerance kernel
// above) and their slopes f(value) feed a divided-difference table with
// doubled nodes, whose Taylor coefficients at t0 give every block; matching
// the slopes makes blocks 0 and 1 exact at the nodes and leaves block j with
// an O(h^(2p+2-j)) extraction error, comfortably inside the O(h^(p+1))
// contract.
NordsieckState start_nordsieck(const GlmTableau& t, const OdeSystem& sys, double t0,
                               const Vec& y0, double h);

// One step: stages from the modified-Newton solver, then
// blocks_j <- h sum_k B(j,k) F_k + sum_k V(j,k) blocks_k and t advances by h.
NordsieckState step(const GlmTableau& t, const OdeSystem& sys, const NordsieckState& state,
                    const NewtonConfig& cfg = {});

// Fixed-step integration over [t0, T] with h = (T - t0)/N: the starting
// procedure (internal, consuming no global steps) followed by N method
// steps. Stage failures are rethrown annotated with the failing step.
IntegrationResult integrate(const GlmTableau& t, const OdeSystem& sys, double t0, double T,
                            long N, const IntegrateOptions& opts = {});

}  // namespace glmqs
