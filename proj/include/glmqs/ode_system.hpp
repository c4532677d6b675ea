#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "glmqs/tableau.hpp"

namespace glmqs {

// Jacobian sparsity declarations. Banded carries the bandwidths; sparse
// carries the fixed nonzero positions (row, col), which must not change
// between evaluations (explicit zeros are kept so factorization patterns
// stay reusable).
struct DenseJacobian {};
struct BandedJacobian {
  int lower = 0;
  int upper = 0;
};
struct SparseJacobian {
  std::vector<std::pair<int, int>> entries;
};
using JacobianStructure = std::variant<DenseJacobian, BandedJacobian, SparseJacobian>;

// An autonomous first-order system y' = f(y) with optional analytic
// Jacobian, optional exact solution data, and initial data. Non-autonomous
// problems are embedded by appending a clock component with unit derivative;
// time_shift records its index when present.
struct OdeSystem {
  int dim = 0;
  std::string name;

  std::function<Vec(const Vec&)> rhs;

  JacobianStructure structure = DenseJacobian{};
  // Dense and banded systems fill a dim x dim matrix (banded systems only
  // write within the band); sparse systems fill a value array aligned with
  // structure entries instead.
  std::function<void(const Vec&, Mat&)> jacobian;
  std::function<void(const Vec&, std::vector<double>&)> sparse_jacobian;

  // k-th derivative vector of the exact solution at time t (k = 0 gives the
  // solution itself). Present when the problem carries enough analytic
  // structure for a direct Nordsieck start.
  std::function<Vec(double, int)> exact_derivatives;
  // Exact solution when known; lets the harness bypass reference refinement.
  std::function<Vec(double)> exact_solution;
  std::optional<int> time_shift;

  // Initial data and the problem's natural integration window.
  Vec y0;
  double t0 = 0.0;
  double t_end = 1.0;

  bool has_analytic_jacobian() const {
    return static_cast<bool>(jacobian) || static_cast<bool>(sparse_jacobian);
  }
};

// One-sided finite differences with increment sqrt(machine epsilon)(1+|y_i|)
// per column. The declared structure prunes work: banded systems perturb
// every (lower+upper+1)-th column together, sparse systems group columns
// greedily by row conflicts. Always returns a dense matrix with entries
// outside the declared pattern left at zero. rhs_evals, when given, is
// incremented by the number of evaluations spent.
Mat finite_difference_jacobian(const OdeSystem& sys, const Vec& y, long* rhs_evals = nullptr);

// Analytic Jacobian as a dense matrix (sparse values scattered into place);
// falls back to finite differences when no analytic form is attached.
Mat jacobian_matrix(const OdeSystem& sys, const Vec& y);

}  // namespace glmqs
