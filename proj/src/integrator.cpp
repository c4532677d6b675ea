#include "glmqs/integrator.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace glmqs {

namespace {

// Five-stage SDIRK of order four with gamma = 1/4 (L-stable, stiffly
// accurate; the last row is the output weight vector).
constexpr int kSdirkStages = 5;
constexpr double kSdirkGamma = 0.25;
const double kSdirkA[kSdirkStages][kSdirkStages] = {
    {0.25, 0, 0, 0, 0},
    {0.5, 0.25, 0, 0, 0},
    {17.0 / 50.0, -1.0 / 25.0, 0.25, 0, 0},
    {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0},
    {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25}};

// Substeps per start interval; the kernel's local accuracy at this
// resolution sits far below every downstream tolerance.
constexpr long kStartSubsteps = 16;

// Modified Newton on Y = scale*f(Y) + rhs_part with a shared factorization
// of I - scale*J. Refreshes once on a slow residual ratio, then treats
// further growth as divergence.
Vec implicit_stage(const OdeSystem& sys, LinearBackend& backend, const Vec& rhs_part,
                   double scale, const NewtonConfig& cfg, const char* who) {
  Vec Y = rhs_part;
  bool refreshed_mid = false;
  double res_prev = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const Vec f = sys.rhs(Y);
    const Vec rv = Y - scale * f - rhs_part;
    const double res = rv.norm();
    if (res <= cfg.abs_tol + cfg.rel_tol * (1.0 + Y.norm())) return Y;
    if (it >= cfg.max_iters)
      throw StageFailure(0, res, std::string(who) + ": stage iteration exhausted (residual " +
                                     std::to_string(res) + ")");
    if (res > 0.5 * res_prev) {
      if (!refreshed_mid) {
        backend.refresh(Y, scale);
        refreshed_mid = true;
      } else if (res > cfg.divergence_factor * res_prev) {
        throw StageFailure(0, res, std::string(who) + ": stage iteration diverged");
      }
    }
    Y -= backend.solve(rv);
    res_prev = res;
  }
}

}  // namespace

Vec sdirk4_solve(const OdeSystem& sys, double t0, const Vec& y0, double t1, long nsteps,
                 const NewtonConfig& cfg) {
  if (nsteps < 1) throw Error("sdirk4_solve: nsteps must be positive");
  const double h = (t1 - t0) / static_cast<double>(nsteps);
  auto backend = make_linear_backend(sys);
  Vec y = y0;
  std::vector<Vec> F(kSdirkStages);
  for (long n = 0; n < nsteps; ++n) {
    if (h != 0.0) backend->refresh(y, h * kSdirkGamma);
    for (int i = 0; i < kSdirkStages; ++i) {
      Vec part = y;
      for (int k = 0; k < i; ++k) part += (h * kSdirkA[i][k]) * F[k];
      const Vec Yi = implicit_stage(sys, *backend, part, h * kSdirkGamma, cfg, "sdirk4");
      F[i] = sys.rhs(Yi);
      if (i == kSdirkStages - 1) y = Yi;  // stiffly accurate output
    }
  }
  return y;
}

NordsieckState start_nordsieck(const GlmTableau& t, const OdeSystem& sys, double t0,
                               const Vec& y0, double h) {
  if (!(h > 0.0)) throw Error("start_nordsieck: h must be positive");
  if (y0.size() != sys.dim) throw StructureError("start_nordsieck: y0 length != dim");
  const int r = t.r;
  const int p = t.p;
  const int d = sys.dim;

  NordsieckState st;
  st.t = t0;
  st.h = h;
  st.blocks.assign(r, Vec::Zero(d));

  if (sys.exact_derivatives) {
    st.blocks[0] = y0;
    double hj = 1.0;
    for (int j = 1; j < r; ++j) {
      hj *= h;
      st.blocks[j] = hj * sys.exact_derivatives(t0, j);
    }
    return st;
  }

  // Reference values at the p+1 nodes t0 + i h, then slopes in the scaled
  // variable tau = (t - t0)/h.
  const int n = p + 1;
  std::vector<Vec> w(n), g(n);
  w[0] = y0;
  NewtonConfig tight;
  tight.rel_tol = 1e-14;
  tight.abs_tol = 1e-16;
  tight.max_iters = 50;
  for (int i = 1; i < n; ++i)
    w[i] = sdirk4_solve(sys, t0 + (i - 1) * h, w[i - 1], t0 + i * h, kStartSubsteps, tight);
  for (int i = 0; i < n; ++i) g[i] = h * sys.rhs(w[i]);

  // Divided differences over the doubled nodes [0,0,1,1,...,p,p]; the level-1
  // entries at repeated nodes are the scaled slopes.
  const int K = 2 * n;
  std::vector<double> z(K);
  for (int i = 0; i < n; ++i) z[2 * i] = z[2 * i + 1] = static_cast<double>(i);
  std::vector<Vec> a(K), cur(K);
  for (int i = 0; i < n; ++i) cur[2 * i] = cur[2 * i + 1] = w[i];
  a[0] = cur[0];
  for (int lvl = 1; lvl < K; ++lvl) {
    std::vector<Vec> nxt(K - lvl);
    for (int i = 0; i + lvl < K; ++i) {
      if (z[i + lvl] == z[i])
        nxt[i] = g[i / 2];
      else
        nxt[i] = (cur[i + 1] - cur[i]) / (z[i + lvl] - z[i]);
    }
    a[lvl] = nxt[0];
    cur = std::move(nxt);
  }

  // Newton form -> Taylor coefficients about tau = 0 by synthetic expansion.
  std::vector<Vec> coef;
  coef.push_back(a[K - 1]);
  for (int k = K - 2; k >= 0; --k) {
    std::vector<Vec> nc(coef.size() + 1, Vec::Zero(d));
    for (size_t m = 0; m < coef.size(); ++m) {
      nc[m + 1] += coef[m];
      nc[m] -= z[k] * coef[m];
    }
    nc[0] += a[k];
    coef = std::move(nc);
  }

  st.blocks[0] = y0;
  double fact = 1.0;
  for (int j = 1; j < r; ++j) {
    fact *= j;
    if (j < static_cast<int>(coef.size())) st.blocks[j] = fact * coef[j];
  }
  return st;
}

namespace {

NordsieckState advance(const GlmTableau& t, const OdeSystem& sys, const NordsieckState& state,
                       const StageValues& sv) {
  const int r = t.r;
  const int s = t.s;
  NordsieckState out;
  out.t = state.t + state.h;
  out.h = state.h;
  out.blocks.assign(r, Vec::Zero(sys.dim));
  for (int j = 0; j < r; ++j) {
    Vec nb = Vec::Zero(sys.dim);
    for (int k = 0; k < s; ++k) nb += (state.h * t.B(j, k)) * sv.F[k];
    for (int k = 0; k < r; ++k) nb += t.V(j, k) * state.blocks[k];
    out.blocks[j] = nb;
  }
  return out;
}

}  // namespace

NordsieckState step(const GlmTableau& t, const OdeSystem& sys, const NordsieckState& state,
                    const NewtonConfig& cfg) {
  StageSolver solver(t, sys, cfg);
  const StageValues sv = solver.solve(state.h, state.blocks);
  return advance(t, sys, state, sv);
}

IntegrationResult integrate(const GlmTableau& t, const OdeSystem& sys, double t0, double T,
                            long N, const IntegrateOptions& opts) {
  if (!(T > t0)) throw Error("integrate: T must exceed t0");
  if (N < t.p + 1) throw Error("integrate: N must be at least p+1");
  const double h = (T - t0) / static_cast<double>(N);

  NordsieckState state = start_nordsieck(t, sys, t0, sys.y0, h);
  StageSolver solver(t, sys, opts.newton);

  IntegrationResult result;
  if (opts.store_trajectory) result.states.push_back(state);
  for (long n = 1; n <= N; ++n) {
    try {
      const StageValues sv = solver.solve(h, state.blocks);
      state = advance(t, sys, state, sv);
    } catch (const StageFailure& e) {
      throw StageFailure(e.stage, e.residual,
                         "step " + std::to_string(n) + " of " + std::to_string(N) + ": " + e.what());
    }
    state.t = t0 + static_cast<double>(n) * h;
    if (opts.store_trajectory) result.states.push_back(state);
  }

  result.y_end = state.blocks[0];
  result.stats.steps = N;
  result.stats.newton_iters = solver.stats().newton_iters;
  result.stats.jacobian_refreshes = solver.stats().jacobian_refreshes;
  result.stats.factorizations = solver.stats().factorizations;
  result.stats.rhs_evals = solver.stats().rhs_evals;
  return result;
}

}  // namespace glmqs
