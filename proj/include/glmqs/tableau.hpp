#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "glmqs/errors.hpp"

namespace glmqs {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Coefficients of an implicit general linear method in Nordsieck form.
//
// One step maps the external vector y^[n-1] (r blocks, block j carrying
// h^(j-1) y^(j-1)) to y^[n] through s internal stages:
//
//   Y_i    = h sum_k A(i,k) f(Y_k) + sum_k U(i,k) y_k^[n-1]
//   y_j^[n] = h sum_k B(j,k) f(Y_k) + sum_k V(j,k) y_k^[n-1]
//
// The class handled here has r = s = p+1, stage order q = p, A lower
// triangular with a constant positive diagonal lambda, and V strictly upper
// triangular apart from V(0,0) = 1.
struct GlmTableau {
  std::string name;
  int p = 0;  // order; the stage order equals p
  int s = 0;  // internal stages
  int r = 0;  // external stages
  double lambda = 0.0;
  Vec c;
  Mat A, U, B, V;
  // Significant decimal digits of the coefficient source; drives the
  // verification tolerance tier for published methods.
  int coeff_digits = 16;
};

// Throws StructureError naming the offending field.
void validate_tableau(const GlmTableau& t);

// Built-in methods "GLMQS-1" .. "GLMQS-4"; throws StructureError for an
// unknown name.
GlmTableau builtin_tableau(const std::string& name);
const std::vector<std::string>& builtin_tableau_names();
bool is_builtin_tableau(const std::string& name);

// Error constant reported by the source publication, for side-by-side
// reporting against the recomputed value.
double published_error_constant(const std::string& name);

// Order-condition data: Cr has columns c^j / j!, Kr is the upper shift,
// Er = exp(Kr) is unit upper triangular with entries 1/(j-i)!.
struct OrderConditionSystem {
  Mat Cr;  // s x r
  Mat Kr;  // r x r
  Mat Er;  // r x r
};
OrderConditionSystem order_condition_system(const Vec& c, int r);

// Max-abs residuals of the two order-condition relations
//   Cr = A Cr Kr + U        (stage)
//   Er = B Cr Kr + V        (output)
struct OrderConditionResidual {
  double stage = 0.0;
  double output = 0.0;
  double max() const { return stage > output ? stage : output; }
};
OrderConditionResidual order_condition_residual(const GlmTableau& t);

// Tolerance tier for order-condition residuals: 10^-(coeff_digits-2).
double order_residual_tolerance(const GlmTableau& t);

// Certificate for the quadratic-stability structure. X has dense first two
// rows; every later row i has a single 1 in column i-1 plus a free entry in
// the last column. The two relations hold except in their first two rows:
//
//   B A = X B,   B U = X V - V X   (rows 3..r)
//
// residual_BA / residual_BU are max-abs over those constrained rows; both are
// zero by convention when r = 2 (no constrained rows). The free entries are
// the least-squares minimizer of the combined constrained-row residual.
struct IqsCertificate {
  Mat X;
  double residual_BA = 0.0;
  double residual_BU = 0.0;
};
IqsCertificate verify_iqs(const GlmTableau& t);

// Principal error constant
//   E = 1/(p+1)! - b^T c^p / p! + v^T beta,
//   beta = (I - Vt)^{-1} ( [1/p!, 1/(p-1)!, ..., 1]^T - Bt c^p / p! )
// where b^T is the first row of B, Bt the remaining rows, v^T the first row
// of V without its leading 1, and Vt the trailing principal block of V.
struct ErrorConstantReport {
  double value = 0.0;         // |E|
  double signed_value = 0.0;  // E
  Vec beta;
};
ErrorConstantReport error_constant(const GlmTableau& t);

// Key-value tableau files ("format: glmqs-tableau/1"). Writing uses 17
// significant digits so a read-back reproduces every field bit for bit.
GlmTableau read_tableau(std::istream& in, const std::string& origin);
GlmTableau read_tableau_file(const std::string& path);
void write_tableau(const GlmTableau& t, std::ostream& out);
void write_tableau_file(const GlmTableau& t, const std::string& path);

// Accepts either a built-in method name or a path to a tableau file.
GlmTableau load_tableau(const std::string& name_or_path);

}  // namespace glmqs
