#include <cmath>

#include "doctest.h"
#include "glmqs/construct.hpp"
#include "glmqs/stability.hpp"

using namespace glmqs;

namespace {

double max_coeff_gap(const GlmTableau& a, const GlmTableau& b) {
  double m = 0.0;
  m = std::max(m, (a.A - b.A).cwiseAbs().maxCoeff());
  m = std::max(m, (a.U - b.U).cwiseAbs().maxCoeff());
  m = std::max(m, (a.B - b.B).cwiseAbs().maxCoeff());
  m = std::max(m, (a.V - b.V).cwiseAbs().maxCoeff());
  m = std::max(m, (a.c - b.c).cwiseAbs().maxCoeff());
  return m;
}

FreeParameterSet point(double lambda, const char* vname, double v) {
  FreeParameterSet ps;
  ps.lambda = lambda;
  ps.v_free[vname] = v;
  return ps;
}

}  // namespace

TEST_CASE("order-1 assembly at the published parameter point recovers it") {
  const GlmTableau printed = builtin_tableau("GLMQS-1");
  const GlmTableau got = assemble_from_parameters(
      1, point(printed.lambda, "v12", printed.V(0, 1)));

  CHECK_NOTHROW(validate_tableau(got));
  CHECK(max_coeff_gap(got, printed) <= 1e-9);
  CHECK(error_constant(got).signed_value ==
        doctest::Approx(-0.22741397764270925).epsilon(1e-9));
  // Assembly-quality digits are encoded for downstream tolerance tiers.
  CHECK(got.coeff_digits >= 10);
}

TEST_CASE("order-1 assembly at a rational point matches hand algebra") {
  // At lambda = 1/2, v12 = -1/2 the limit matrix's second invariant vanishes
  // identically (its factor lambda + v12 is zero), so the defining system has
  // a one-parameter family of roots; the assembly's branch representative is
  // the member with B row 1 = (1 - lambda, lambda). Worked by hand in exact
  // rationals: B(0,1) = lambda (1 - v12 - lambda) = 1/2, B(0,0) = 1.
  const GlmTableau got = assemble_from_parameters(1, point(0.5, "v12", -0.5));
  CHECK(std::abs(got.B(0, 0) - 1.0) <= 1e-12);
  CHECK(std::abs(got.B(0, 1) - 0.5) <= 1e-12);
  CHECK(std::abs(got.B(1, 0) - 0.5) <= 1e-12);
  CHECK(std::abs(got.B(1, 1) - 0.5) <= 1e-12);
  CHECK(got.V(0, 1) == doctest::Approx(-0.5).epsilon(1e-12));
  // The error constant is invariant along the root family.
  CHECK(error_constant(got).signed_value == doctest::Approx(-0.25).epsilon(1e-9));

  const auto res = order_condition_residual(got);
  CHECK(res.max() <= 1e-10);
}

TEST_CASE("order-2 assembly at the published parameter point") {
  const GlmTableau printed = builtin_tableau("GLMQS-2");
  const GlmTableau got = assemble_from_parameters(
      2, point(printed.lambda, "v13", printed.V(0, 2)));
  CHECK_NOTHROW(validate_tableau(got));

  // Frozen 50-digit solution of the same defining system at this point.
  CHECK(std::abs(got.U(1, 2) - -0.081379724332667741) <= 1e-8);
  CHECK(std::abs(got.U(2, 2) - -0.16275944866533548) <= 1e-8);
  CHECK(std::abs(got.B(0, 0) - 0.25285162186374657) <= 1e-8);
  CHECK(std::abs(got.B(0, 1) - 1.9224564522107194) <= 1e-8);
  CHECK(std::abs(got.B(0, 2) - -0.47016707834061907) <= 1e-8);
  CHECK(std::abs(got.B(1, 0) - -1.3255188973306710) <= 1e-8);
  CHECK(std::abs(got.B(1, 1) - 2.3255188973306710) <= 1e-8);
  CHECK(std::abs(got.B(2, 0) - -2.0) <= 1e-8);
  CHECK(std::abs(got.B(2, 1) - 2.0) <= 1e-8);
  CHECK(std::abs(got.B(1, 2)) <= 1e-8);
  CHECK(std::abs(got.B(2, 2)) <= 1e-8);
  CHECK(std::abs(got.V(0, 1) - -0.70514099573384694) <= 1e-8);
  CHECK(std::abs(got.V(1, 2) - -0.16275944866533548) <= 1e-8);
  CHECK(std::abs(error_constant(got).signed_value - 0.10663039925058566) <= 1e-8);

  // Both order conditions and the commutation certificate hold here.
  CHECK(order_condition_residual(got).max() <= 1e-9);
  const auto cert = verify_iqs(got);
  CHECK(cert.residual_BA <= 1e-8);
  CHECK(cert.residual_BU <= 1e-8);
  CHECK(std::abs(cert.X(2, 2) - -0.75) <= 1e-6);

  // The defining system at the printed (lambda, v13) lands far from the
  // printed order-2 coefficients; the gap is itself a stable quantity.
  const double gap = max_coeff_gap(got, printed);
  CHECK(gap == doctest::Approx(0.72887253299795458).epsilon(1e-6));
}

TEST_CASE("assembled members carry a vanishing-at-infinity stability pair") {
  const GlmTableau got = assemble_from_parameters(1, point(0.4, "v12", -0.26));
  const auto poly = stability_polynomial(got);
  CHECK(std::abs(poly.p1(got.r)) <= 1e-9);
  CHECK(std::abs(poly.p0(got.r)) <= 1e-9);
  CHECK(spectral_radius(stability_matrix_at_infinity(got)) <= 1e-6);
}

TEST_CASE("assembly argument validation") {
  CHECK_THROWS_AS(assemble_from_parameters(3, point(0.5, "v14", 0.0)), Error);
  CHECK_THROWS_AS(assemble_from_parameters(1, point(-0.5, "v12", 0.0)), Error);
  // Wrong / missing free-parameter name for the order.
  CHECK_THROWS_AS(assemble_from_parameters(1, point(0.5, "v13", 0.0)), Error);
  CHECK_THROWS_AS(assemble_from_parameters(2, point(0.5, "v12", 0.0)), Error);

  FreeParameterSet ps = point(0.5, "v12", -0.5);
  ps.bounds["lambda"] = {0.1, 0.4};  // excludes 0.5
  CHECK_THROWS_AS(assemble_from_parameters(1, ps), Error);
  ps.bounds["lambda"] = {0.1, 1.0};
  ps.bounds["v12"] = {0.0, 1.0};  // excludes -0.5
  CHECK_THROWS_AS(assemble_from_parameters(1, ps), Error);
}

TEST_CASE("error-constant optimization over a small box") {
  FreeParameterSet box;
  box.bounds["lambda"] = {0.35, 0.55};
  box.bounds["v12"] = {-0.5, -0.1};
  const auto result = optimize_error_constant(1, box);

  CHECK(result.feasible);
  CHECK_NOTHROW(validate_tableau(result.tableau));
  CHECK(result.worst_boundary_radius <= 1.0 + 1e-8);
  CHECK(result.radius_at_infinity <= 1e-6);
  CHECK_FALSE(result.optimizer_trace.empty());

  // The optimum must not be worse than any screened grid point, and every
  // evaluation must respect the box.
  double best_grid = 1e300;
  for (const auto& e : result.optimizer_trace) {
    CHECK(e.lambda >= 0.35 - 1e-12);
    CHECK(e.lambda <= 0.55 + 1e-12);
    CHECK(e.v >= -0.5 - 1e-12);
    CHECK(e.v <= -0.1 + 1e-12);
    if (e.feasible && !std::isnan(e.E)) best_grid = std::min(best_grid, e.E);
  }
  CHECK(std::abs(result.E) <= best_grid + 1e-12);

  // The returned tableau really sits at the reported objective value.
  CHECK(error_constant(result.tableau).signed_value ==
        doctest::Approx(result.E).epsilon(1e-9));

  // The emitted member passes its own verification battery.
  for (const auto& line : verification_checks(result.tableau)) {
    CAPTURE(line.name);
    CHECK(line.pass);
  }
}

TEST_CASE("optimization requires a complete bounds box") {
  FreeParameterSet missing;
  missing.bounds["lambda"] = {0.1, 1.0};
  CHECK_THROWS_AS(optimize_error_constant(1, missing), Error);

  FreeParameterSet inverted;
  inverted.bounds["lambda"] = {1.0, 0.1};
  inverted.bounds["v12"] = {-1.0, 0.0};
  CHECK_THROWS_AS(optimize_error_constant(1, inverted), Error);

  FreeParameterSet negative;
  negative.bounds["lambda"] = {-1.0, -0.5};
  negative.bounds["v12"] = {-1.0, 0.0};
  CHECK_THROWS_AS(optimize_error_constant(1, negative), Error);

  CHECK_THROWS_AS(optimize_error_constant(4, missing), Error);
}

TEST_CASE("certification of the published methods reports honest gates") {
  // Order 1 passes the whole battery.
  const auto c1 = certify_published("GLMQS-1");
  CHECK(c1.all_checks_pass());
  CHECK(c1.feasible);
  CHECK(std::abs(c1.E) == doctest::Approx(0.22741397764270926).epsilon(1e-10));

  // Order 2 fails exactly one gate: the stage order conditions of the
  // printed coefficients have a 0.125 residual. Everything else holds.
  const auto c2 = certify_published("GLMQS-2");
  CHECK_FALSE(c2.all_checks_pass());
  int failed = 0;
  for (const auto& line : c2.checks) {
    if (!line.pass) {
      ++failed;
      CHECK(line.name == "order-conditions");
      CHECK(line.value == doctest::Approx(0.125).epsilon(1e-9));
    }
  }
  CHECK(failed == 1);

  // Orders 3 and 4 pass at their digit-aware tiers.
  CHECK(certify_published("GLMQS-3").all_checks_pass());
  CHECK(certify_published("GLMQS-4").all_checks_pass());
}

TEST_CASE("verification battery line inventory") {
  const auto lines = verification_checks(builtin_tableau("GLMQS-3"));
  REQUIRE(lines.size() == 6);
  const char* expected[] = {"order-conditions", "commutation-certificate",
                            "quadratic-form",   "boundary-scan",
                            "limit-damping",    "error-constant"};
  for (int i = 0; i < 6; ++i) CHECK(lines[i].name == expected[i]);

  // The error-constant line is informational for the high-order methods
  // (published values carry too few digits for a strict gate).
  CHECK(lines[5].pass);
  CHECK(lines[5].tol == 0.0);

  // Non-built-in tableaus get no published-constant comparison at all.
  GlmTableau clone = builtin_tableau("GLMQS-3");
  clone.name = "local-copy";
  const auto anon = verification_checks(clone);
  CHECK(anon.size() == 5);
}
