#pragma once

#include <memory>
#include <vector>

#include "glmqs/ode_system.hpp"
#include "glmqs/tableau.hpp"

namespace glmqs {

struct NewtonConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  int max_iters = 25;
  enum class JacobianReuse { per_step, per_stage, never };
  JacobianReuse jacobian_reuse = JacobianReuse::per_step;
  double divergence_factor = 2.0;
};

// Internal stages of one step together with their derivatives and the
// iteration bookkeeping. On success every stage residual
// ||Y_j - h lambda f(Y_j) - r_j|| is at or below
// abs_tol + rel_tol(1+||Y_j||) plus the backend's evaluation-noise floor.
struct StageValues {
  std::vector<Vec> Y;
  std::vector<Vec> F;
  std::vector<int> newton_iters;
  std::vector<double> residuals;
  bool converged = false;
};

struct SolveStats {
  long newton_iters = 0;
  long jacobian_refreshes = 0;
  long factorizations = 0;
  long rhs_evals = 0;
};

// Factor/solve handle for I - scale*J keyed to the declared Jacobian
// structure: dense partial-pivot LU, banded LU, or a direct sparse
// factorization whose symbolic analysis is reused across refactorizations.
// refresh() evaluates the Jacobian at y (analytic when attached, structured
// finite differences otherwise) and factorizes; rhs_evals counts the
// evaluations spent on differencing.
class LinearBackend {
 public:
  virtual ~LinearBackend() = default;
  virtual void refresh(const Vec& y, double scale) = 0;
  virtual Vec solve(const Vec& b) const = 0;
  bool ready() const { return ready_; }

  // First-order bound on the rounding noise of a stage residual evaluated at
  // the refresh point: eps * |scale| * || |J| (1 + |y|) ||. A residual this
  // small is indistinguishable from an exact zero, so the stage test accepts
  // at tolerance-plus-floor (very stiff right-hand sides bottom out here).
  double noise_floor() const { return floor_; }

  long rhs_evals = 0;
  long factorizations = 0;

 protected:
  bool ready_ = false;
  double floor_ = 0.0;
};

std::unique_ptr<LinearBackend> make_linear_backend(const OdeSystem& sys);

// Solves the implicit stages of one step sequentially by modified Newton on
//   Y_j = h lambda f(Y_j) + r_j,
//   r_j = h sum_{k<j} A(j,k) F_k + sum_k U(j,k) blocks_k,
// with the iteration matrix I - h lambda J frozen per the reuse policy and
// refreshed once mid-iteration when the residual ratio exceeds 1/2. A
// residual growing past divergence_factor after that refresh, or running out
// of iterations, raises StageFailure. Reusable across steps: the factorized
// iteration matrix persists between solve() calls under the per_step/never
// policies until h changes.
class StageSolver {
 public:
  StageSolver(const GlmTableau& t, const OdeSystem& sys, NewtonConfig cfg = {});

  StageValues solve(double h, const std::vector<Vec>& prev_blocks);
  const SolveStats& stats() const { return stats_; }

 private:
  void refresh(const Vec& y, double h);

  const GlmTableau tableau_;
  const OdeSystem& sys_;
  NewtonConfig cfg_;
  std::unique_ptr<LinearBackend> backend_;
  double factored_h_ = 0.0;
  SolveStats stats_;
};

// One-shot convenience wrapper over StageSolver.
StageValues solve_stages(const GlmTableau& t, const OdeSystem& sys, double h,
                         const std::vector<Vec>& prev_blocks, const NewtonConfig& cfg = {});

}  // namespace glmqs
