#include "glmqs/ode_system.hpp"

#include <cmath>
#include <limits>

namespace glmqs {

namespace {

double fd_increment(double yi) {
  static const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  return root_eps * (1.0 + std::abs(yi));
}

// Rows a perturbation of column j can influence under the declared pattern.
std::vector<int> column_rows(const JacobianStructure& st, int d, int j) {
  std::vector<int> rows;
  if (std::holds_alternative<DenseJacobian>(st)) {
    rows.resize(d);
    for (int i = 0; i < d; ++i) rows[i] = i;
  } else if (const auto* b = std::get_if<BandedJacobian>(&st)) {
    int lo = std::max(0, j - b->upper);
    int hi = std::min(d - 1, j + b->lower);
    for (int i = lo; i <= hi; ++i) rows.push_back(i);
  } else {
    const auto& entries = std::get<SparseJacobian>(st).entries;
    for (const auto& [ri, ci] : entries)
      if (ci == j) rows.push_back(ri);
  }
  return rows;
}

// Column groups whose row sets are pairwise disjoint, so each group costs a
// single rhs evaluation.
std::vector<std::vector<int>> column_groups(const JacobianStructure& st, int d) {
  std::vector<std::vector<int>> groups;
  if (std::holds_alternative<DenseJacobian>(st)) {
    groups.reserve(d);
    for (int j = 0; j < d; ++j) groups.push_back({j});
    return groups;
  }
  if (const auto* b = std::get_if<BandedJacobian>(&st)) {
    int stride = b->lower + b->upper + 1;
    for (int g = 0; g < std::min(stride, d); ++g) {
      std::vector<int> cols;
      for (int j = g; j < d; j += stride) cols.push_back(j);
      groups.push_back(std::move(cols));
    }
    return groups;
  }
  // Greedy first-fit on row conflicts for general sparse patterns.
  std::vector<std::vector<bool>> occupied;  // per group, rows taken
  for (int j = 0; j < d; ++j) {
    auto rows = column_rows(st, d, j);
    size_t g = 0;
    for (; g < groups.size(); ++g) {
      bool clash = false;
      for (int rj : rows)
        if (occupied[g][rj]) {
          clash = true;
          break;
        }
      if (!clash) break;
    }
    if (g == groups.size()) {
      groups.emplace_back();
      occupied.emplace_back(d, false);
    }
    groups[g].push_back(j);
    for (int rj : rows) occupied[g][rj] = true;
  }
  return groups;
}

}  // namespace

Mat finite_difference_jacobian(const OdeSystem& sys, const Vec& y, long* rhs_evals) {
  const int d = sys.dim;
  Mat J = Mat::Zero(d, d);
  const Vec f0 = sys.rhs(y);
  const auto groups = column_groups(sys.structure, d);
  if (rhs_evals) *rhs_evals += 1 + static_cast<long>(groups.size());
  Vec yp = y;
  for (const auto& cols : groups) {
    for (int j : cols) yp[j] = y[j] + fd_increment(y[j]);
    const Vec fp = sys.rhs(yp);
    for (int j : cols) {
      double delta = yp[j] - y[j];
      for (int i : column_rows(sys.structure, d, j)) J(i, j) = (fp[i] - f0[i]) / delta;
      yp[j] = y[j];
    }
  }
  return J;
}

Mat jacobian_matrix(const OdeSystem& sys, const Vec& y) {
  const int d = sys.dim;
  if (sys.sparse_jacobian) {
    const auto& entries = std::get<SparseJacobian>(sys.structure).entries;
    std::vector<double> vals(entries.size());
    sys.sparse_jacobian(y, vals);
    Mat J = Mat::Zero(d, d);
    for (size_t k = 0; k < entries.size(); ++k) J(entries[k].first, entries[k].second) = vals[k];
    return J;
  }
  if (sys.jacobian) {
    Mat J = Mat::Zero(d, d);
    sys.jacobian(y, J);
    return J;
  }
  return finite_difference_jacobian(sys, y);
}

}  // namespace glmqs
