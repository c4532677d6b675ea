#include "glmqs/newton.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>
#include <lapacke.h>
#include <limits>
#include <string>

namespace glmqs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt_res(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

class DenseBackend : public LinearBackend {
 public:
  explicit DenseBackend(const OdeSystem& sys) : sys_(sys) {}

  void refresh(const Vec& y, double scale) override {
    Mat J = sys_.has_analytic_jacobian() ? jacobian_matrix(sys_, y)
                                         : finite_difference_jacobian(sys_, y, &rhs_evals);
    floor_ = kEps * std::abs(scale) *
             (J.cwiseAbs() * (Vec::Ones(sys_.dim) + y.cwiseAbs())).norm();
    Mat W = Mat::Identity(sys_.dim, sys_.dim) - scale * J;
    lu_.compute(W);
    double scale_w = W.cwiseAbs().maxCoeff();
    double dmin = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (dmin <= sys_.dim * kEps * std::max(1.0, scale_w))
      throw FactorizationError("dense iteration matrix is numerically singular");
    ++factorizations;
    ready_ = true;
  }

  Vec solve(const Vec& b) const override { return lu_.solve(b); }

 private:
  const OdeSystem& sys_;
  Eigen::PartialPivLU<Mat> lu_;
};

class BandedBackend : public LinearBackend {
 public:
  BandedBackend(const OdeSystem& sys, BandedJacobian band) : sys_(sys), band_(band) {
    ldab_ = 2 * band_.lower + band_.upper + 1;
    ab_.resize(static_cast<size_t>(ldab_) * sys_.dim);
    ipiv_.resize(sys_.dim);
  }

  void refresh(const Vec& y, double scale) override {
    Mat J = sys_.has_analytic_jacobian() ? jacobian_matrix(sys_, y)
                                         : finite_difference_jacobian(sys_, y, &rhs_evals);
    const int d = sys_.dim;
    std::fill(ab_.begin(), ab_.end(), 0.0);
    Vec rows = Vec::Zero(d);
    for (int j = 0; j < d; ++j) {
      int lo = std::max(0, j - band_.upper);
      int hi = std::min(d - 1, j + band_.lower);
      for (int i = lo; i <= hi; ++i) {
        double w = (i == j ? 1.0 : 0.0) - scale * J(i, j);
        ab_[static_cast<size_t>(j) * ldab_ + band_.lower + band_.upper + i - j] = w;
        rows[i] += std::abs(J(i, j)) * (1.0 + std::abs(y[j]));
      }
    }
    floor_ = kEps * std::abs(scale) * rows.norm();
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, d, d, band_.lower, band_.upper,
                                     ab_.data(), ldab_, ipiv_.data());
    if (info != 0) throw FactorizationError("banded iteration matrix is numerically singular");
    ++factorizations;
    ready_ = true;
  }

  Vec solve(const Vec& b) const override {
    Vec x = b;
    lapack_int info =
        LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', sys_.dim, band_.lower, band_.upper, 1, ab_.data(),
                       ldab_, ipiv_.data(), x.data(), sys_.dim);
    if (info != 0) throw FactorizationError("banded back substitution failed");
    return x;
  }

 private:
  const OdeSystem& sys_;
  BandedJacobian band_;
  int ldab_ = 0;
  std::vector<double> ab_;
  std::vector<lapack_int> ipiv_;
};

class SparseBackend : public LinearBackend {
 public:
  explicit SparseBackend(const OdeSystem& sys)
      : sys_(sys), entries_(std::get<SparseJacobian>(sys.structure).entries), W_(sys.dim, sys.dim) {}

  void refresh(const Vec& y, double scale) override {
    std::vector<double> vals(entries_.size());
    if (sys_.sparse_jacobian) {
      sys_.sparse_jacobian(y, vals);
    } else {
      Mat J = finite_difference_jacobian(sys_, y, &rhs_evals);
      for (size_t k = 0; k < entries_.size(); ++k) vals[k] = J(entries_[k].first, entries_[k].second);
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(entries_.size() + sys_.dim);
    Vec rows = Vec::Zero(sys_.dim);
    for (size_t k = 0; k < entries_.size(); ++k) {
      trips.emplace_back(entries_[k].first, entries_[k].second, -scale * vals[k]);
      rows[entries_[k].first] += std::abs(vals[k]) * (1.0 + std::abs(y[entries_[k].second]));
    }
    floor_ = kEps * std::abs(scale) * rows.norm();
    for (int i = 0; i < sys_.dim; ++i) trips.emplace_back(i, i, 1.0);
    W_.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed_) {
      lu_.analyzePattern(W_);
      analyzed_ = true;
    }
    lu_.factorize(W_);
    if (lu_.info() != Eigen::Success)
      throw FactorizationError("sparse iteration matrix factorization failed");
    ++factorizations;
    ready_ = true;
  }

  Vec solve(const Vec& b) const override { return lu_.solve(b); }

 private:
  const OdeSystem& sys_;
  const std::vector<std::pair<int, int>> entries_;
  Eigen::SparseMatrix<double> W_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool analyzed_ = false;
};

}  // namespace

std::unique_ptr<LinearBackend> make_linear_backend(const OdeSystem& sys) {
  if (std::holds_alternative<SparseJacobian>(sys.structure))
    return std::make_unique<SparseBackend>(sys);
  if (const auto* b = std::get_if<BandedJacobian>(&sys.structure))
    return std::make_unique<BandedBackend>(sys, *b);
  return std::make_unique<DenseBackend>(sys);
}

StageSolver::StageSolver(const GlmTableau& t, const OdeSystem& sys, NewtonConfig cfg)
    : tableau_(t), sys_(sys), cfg_(cfg), backend_(make_linear_backend(sys)) {
  validate_tableau(t);
  if (cfg_.rel_tol <= 0 || cfg_.abs_tol <= 0) throw Error("newton tolerances must be positive");
  if (cfg_.max_iters < 1) throw Error("newton max_iters must be at least 1");
}

void StageSolver::refresh(const Vec& y, double h) {
  backend_->refresh(y, h * tableau_.lambda);
  factored_h_ = h;
  ++stats_.jacobian_refreshes;
}

StageValues StageSolver::solve(double h, const std::vector<Vec>& blocks) {
  const int s = tableau_.s;
  const int r = tableau_.r;
  const int d = sys_.dim;
  if (static_cast<int>(blocks.size()) != r)
    throw StructureError("solve_stages: previous state must carry r blocks");

  StageValues out;
  out.Y.resize(s);
  out.F.resize(s);
  out.newton_iters.assign(s, 0);
  out.residuals.assign(s, 0.0);

  using Reuse = NewtonConfig::JacobianReuse;
  if (h != 0.0) {
    bool stale = !backend_->ready() || factored_h_ != h;
    if (cfg_.jacobian_reuse == Reuse::per_step || stale) refresh(blocks[0], h);
  }

  const double hl = h * tableau_.lambda;
  for (int j = 0; j < s; ++j) {
    Vec rj = Vec::Zero(d);
    for (int k = 0; k < j; ++k) rj += (h * tableau_.A(j, k)) * out.F[k];
    for (int k = 0; k < r; ++k) rj += tableau_.U(j, k) * blocks[k];

    if (h != 0.0 && cfg_.jacobian_reuse == Reuse::per_stage) refresh(rj, h);

    Vec Y = rj;
    bool refreshed_mid = false;
    bool done = false;
    double res = 0.0;
    double res_prev = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it <= cfg_.max_iters; ++it) {
      const Vec f = sys_.rhs(Y);
      ++stats_.rhs_evals;
      const Vec rv = Y - hl * f - rj;
      res = rv.norm();
      // The residual cannot be driven below the rounding of its own
      // evaluation; the backend's noise floor bounds that to first order.
      const double floor = h != 0.0 ? backend_->noise_floor() : 0.0;
      if (res <= cfg_.abs_tol + cfg_.rel_tol * (1.0 + Y.norm()) + floor) {
        out.F[j] = f;
        done = true;
        break;
      }
      if (it == cfg_.max_iters) break;
      if (res > 0.5 * res_prev) {
        if (!refreshed_mid && h != 0.0) {
          refresh(Y, h);
          refreshed_mid = true;
        } else if (res > cfg_.divergence_factor * res_prev) {
          stats_.rhs_evals += backend_->rhs_evals, backend_->rhs_evals = 0;
          throw StageFailure(j + 1, res,
                             "stage " + std::to_string(j + 1) + " diverged (residual " +
                                 fmt_res(res) + ")");
        }
      }
      Y -= backend_->solve(rv);
      ++stats_.newton_iters;
      res_prev = res;
    }
    stats_.rhs_evals += backend_->rhs_evals, backend_->rhs_evals = 0;
    stats_.factorizations += backend_->factorizations, backend_->factorizations = 0;
    if (!done)
      throw StageFailure(j + 1, res,
                         "stage " + std::to_string(j + 1) + " did not converge within " +
                             std::to_string(cfg_.max_iters) + " iterations (residual " +
                             fmt_res(res) + ")");
    out.Y[j] = Y;
    out.newton_iters[j] = it;
    out.residuals[j] = res;
  }
  out.converged = true;
  return out;
}

StageValues solve_stages(const GlmTableau& t, const OdeSystem& sys, double h,
                         const std::vector<Vec>& prev_blocks, const NewtonConfig& cfg) {
  StageSolver solver(t, sys, cfg);
  return solver.solve(h, prev_blocks);
}

}  // namespace glmqs
