#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "glmqs/construct.hpp"
#include "glmqs/errors.hpp"
#include "glmqs/harness.hpp"
#include "glmqs/problems.hpp"
#include "glmqs/stability.hpp"
#include "glmqs/tableau.hpp"

namespace glmqs {

namespace {

std::string f17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void print_checks(std::ostream& os, const std::vector<CheckLine>& checks) {
  for (const auto& c : checks) {
    os << "check." << c.name << " = " << (c.pass ? "PASS" : "FAIL") << " (value " << f17(c.value);
    if (c.tol > 0.0) os << ", tol " << f17(c.tol);
    if (!c.detail.empty()) os << "; " << c.detail;
    os << ")\n";
  }
}

bool checks_pass(const std::vector<CheckLine>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

int cmd_verify(const std::string& target) {
  const GlmTableau t = load_tableau(target);
  const auto res = order_condition_residual(t);
  const auto cert = verify_iqs(t);
  const auto err = error_constant(t);
  std::ostream& os = std::cout;
  os << "tableau = " << t.name << "\n";
  os << "order = " << t.p << "\n";
  os << "stages = " << t.s << "\n";
  os << "lambda = " << f17(t.lambda) << "\n";
  os << "coeff_digits = " << t.coeff_digits << "\n";
  os << "residual.stage = " << f17(res.stage) << "\n";
  os << "residual.output = " << f17(res.output) << "\n";
  os << "residual.tier = " << f17(order_residual_tolerance(t)) << "\n";
  os << "iqs.residual_BA = " << f17(cert.residual_BA) << "\n";
  os << "iqs.residual_BU = " << f17(cert.residual_BU) << "\n";
  os << "error_constant = " << f17(err.value) << "\n";
  os << "error_constant.signed = " << f17(err.signed_value) << "\n";
  if (is_builtin_tableau(t.name))
    os << "error_constant.published = " << f17(published_error_constant(t.name)) << "\n";
  const auto checks = verification_checks(t);
  print_checks(os, checks);
  const bool pass = checks_pass(checks);
  os << "verdict = " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_stability(const std::string& target, int grid_points, double y_max,
                  const std::string& csv) {
  const GlmTableau t = load_tableau(target);
  const bool keep = !csv.empty();
  const auto scan = scan_a_stability(t, grid_points, 1e-6, y_max, 1e-8, keep);
  const auto poly = stability_polynomial(t, false);
  const double tier = order_residual_tolerance(t);
  const auto lim = check_l_stability(t, std::pow(10.0 * tier, 1.0 / t.r));
  std::ostream& os = std::cout;
  os << "tableau = " << t.name << "\n";
  os << "grid_points = " << grid_points << "\n";
  os << "y_max = " << f17(y_max) << "\n";
  os << "worst_radius = " << f17(scan.worst_radius) << "\n";
  os << "worst_y = " << f17(scan.worst_y) << "\n";
  os << "radius_at_infinity = " << f17(scan.radius_at_infinity) << "\n";
  os << "a_stable = " << (scan.a_stable ? "true" : "false") << "\n";
  os << "polynomial.quad_leading =";
  for (int i = 0; i <= poly.r; ++i) os << " " << f17(poly.quad_leading[i]);
  os << "\npolynomial.p1 =";
  for (int i = 0; i <= poly.r; ++i) os << " " << f17(poly.p1[i]);
  os << "\npolynomial.p0 =";
  for (int i = 0; i <= poly.r; ++i) os << " " << f17(poly.p0[i]);
  os << "\npolynomial.spurious_max = " << f17(poly.spurious_max) << "\n";
  os << "limit.p1_top = " << f17(lim.p1_top) << "\n";
  os << "limit.p0_top = " << f17(lim.p0_top) << "\n";
  os << "limit.radius_tol = " << f17(lim.radius_tol) << "\n";
  os << "l_stable = " << (lim.l_stable ? "true" : "false") << "\n";
  if (keep) {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write '" + csv + "'");
    out << "y,spectral_radius\n";
    for (size_t i = 0; i < scan.grid_y.size(); ++i)
      out << f17(scan.grid_y[i]) << "," << f17(scan.grid_radius[i]) << "\n";
    os << "csv = " << csv << "\n";
  }
  return (scan.a_stable && lim.l_stable) ? 0 : 1;
}

int cmd_integrate(const std::string& method, const std::string& problem,
                  const std::vector<std::string>& params, double t0_flag, double tend_flag,
                  long steps, const std::string& traj) {
  std::map<std::string, std::string> kv;
  for (const auto& s : params) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ParseError("--param expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  const GlmTableau t = load_tableau(method);
  const OdeSystem sys = make_problem(problem, kv);
  const double t0 = std::isnan(t0_flag) ? sys.t0 : t0_flag;
  const double T = std::isnan(tend_flag) ? sys.t_end : tend_flag;
  IntegrateOptions opts;
  opts.store_trajectory = !traj.empty();
  const IntegrationResult res = integrate(t, sys, t0, T, steps, opts);
  std::ostream& os = std::cout;
  os << "problem = " << sys.name << "\n";
  os << "method = " << t.name << "\n";
  os << "dim = " << sys.dim << "\n";
  os << "t0 = " << f17(t0) << "\n";
  os << "T = " << f17(T) << "\n";
  os << "steps = " << steps << "\n";
  os << "h = " << f17((T - t0) / static_cast<double>(steps)) << "\n";
  os << "y_end =";
  for (int i = 0; i < res.y_end.size(); ++i) os << " " << f17(res.y_end[i]);
  os << "\n";
  os << "stats.newton_iters = " << res.stats.newton_iters << "\n";
  os << "stats.jacobian_refreshes = " << res.stats.jacobian_refreshes << "\n";
  os << "stats.factorizations = " << res.stats.factorizations << "\n";
  os << "stats.rhs_evals = " << res.stats.rhs_evals << "\n";
  if (!traj.empty()) {
    std::ofstream out(traj);
    if (!out) throw Error("cannot write '" + traj + "'");
    out << "t";
    for (int i = 0; i < sys.dim; ++i) out << ",y" << i;
    out << "\n";
    for (const auto& st : res.states) {
      out << f17(st.t);
      for (int i = 0; i < sys.dim; ++i) out << "," << f17(st.blocks[0][i]);
      out << "\n";
    }
    os << "trajectory = " << traj << "\n";
  }
  return 0;
}

int cmd_convergence(const std::string& spec_file) {
  const StudySpec spec = parse_study_file(spec_file);
  const StudyResult result = run_study(spec);
  write_study_outputs(spec, result);
  std::cout << result.report;
  std::cout << "output.dir = " << spec.output_dir << "\n";
  bool any_ok = false;
  for (const auto& row : result.rows) any_ok = any_ok || !row.failed;
  return any_ok ? 0 : 1;
}

FreeParameterSet parse_bounds_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open bounds file '" + path + "'");
  FreeParameterSet fps;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto at = [&](const std::string& what) {
      return path + ":" + std::to_string(lineno) + ": " + what;
    };
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(at("expected name = lo,hi"));
    const std::string key = strip(line.substr(0, eq));
    std::string val = strip(line.substr(eq + 1));
    if (key.empty()) throw ParseError(at("empty parameter name"));
    if (fps.bounds.count(key)) throw ParseError(at("duplicate parameter '" + key + "'"));
    double lo = 0.0, hi = 0.0;
    const auto comma = val.find(',');
    try {
      size_t pos = 0;
      if (comma == std::string::npos) {
        lo = hi = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
      } else {
        const std::string a = strip(val.substr(0, comma));
        const std::string b = strip(val.substr(comma + 1));
        lo = std::stod(a, &pos);
        if (pos != a.size()) throw std::invalid_argument(a);
        hi = std::stod(b, &pos);
        if (pos != b.size()) throw std::invalid_argument(b);
      }
    } catch (const std::exception&) {
      throw ParseError(at("cannot parse interval '" + val + "'"));
    }
    if (!(lo <= hi)) throw ParseError(at("interval must satisfy lo <= hi"));
    fps.bounds[key] = {lo, hi};
  }
  return fps;
}

int cmd_construct(int order, const std::string& bounds_file, std::string output,
                  const std::string& trace) {
  const FreeParameterSet fps = parse_bounds_file(bounds_file);
  const ConstructionResult res = optimize_error_constant(order, fps);
  if (output.empty()) output = "constructed-p" + std::to_string(order) + ".tableau";
  write_tableau_file(res.tableau, output);
  const auto checks = verification_checks(res.tableau);
  std::ostream& os = std::cout;
  os << "order = " << order << "\n";
  os << "lambda = " << f17(res.tableau.lambda) << "\n";
  os << "v1" << order + 1 << " = " << f17(res.tableau.V(0, order)) << "\n";
  os << "E = " << f17(res.E) << "\n";
  os << "abs_E = " << f17(std::abs(res.E)) << "\n";
  os << "feasible = " << (res.feasible ? "true" : "false") << "\n";
  os << "worst_boundary_radius = " << f17(res.worst_boundary_radius) << "\n";
  os << "radius_at_infinity = " << f17(res.radius_at_infinity) << "\n";
  os << "evaluations = " << res.optimizer_trace.size() << "\n";
  os << "tableau_file = " << output << "\n";
  if (!trace.empty()) {
    std::ofstream out(trace);
    if (!out) throw Error("cannot write '" + trace + "'");
    out << "lambda,v,abs_E,feasible,note\n";
    for (const auto& e : res.optimizer_trace)
      out << f17(e.lambda) << "," << f17(e.v) << "," << f17(e.E) << ","
          << (e.feasible ? "true" : "false") << "," << e.note << "\n";
    os << "trace = " << trace << "\n";
  }
  print_checks(os, checks);
  const bool pass = checks_pass(checks);
  os << "verdict = " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_certify(const std::string& name) {
  const ConstructionResult res = certify_published(name);
  std::ostream& os = std::cout;
  os << "tableau = " << res.tableau.name << "\n";
  os << "error_constant.signed = " << f17(res.E) << "\n";
  os << "error_constant.published = " << f17(published_error_constant(res.tableau.name)) << "\n";
  os << "feasible = " << (res.feasible ? "true" : "false") << "\n";
  os << "worst_boundary_radius = " << f17(res.worst_boundary_radius) << "\n";
  os << "radius_at_infinity = " << f17(res.radius_at_infinity) << "\n";
  print_checks(os, res.checks);
  os << "verdict = " << (res.all_checks_pass() ? "PASS" : "FAIL") << "\n";
  return res.all_checks_pass() ? 0 : 1;
}

int cmd_list_problems() {
  const VdpConfig vdp;
  const BurgersConfig bur;
  const GrayScottConfig gs;
  std::ostream& os = std::cout;
  os << "vdp: stiff oscillator y' = z, z' = ((1 - y^2) z - y)/epsilon; dim 2\n"
     << "  defaults: epsilon=" << vdp.epsilon << " t0=" << vdp.t0 << " T=" << vdp.T << "\n";
  os << "burgers: viscous Burgers on [0,L], Dirichlet ends, upwind convection; dim M-2\n"
     << "  defaults: d=" << bur.d << " L=" << bur.L << " M=" << bur.M << " T=" << bur.T << "\n";
  os << "grayscott: reaction-diffusion on the unit square, M x M cells, reflective walls; dim "
        "2*M*M\n"
     << "  defaults: d1=" << gs.d1 << " d2=" << gs.d2 << " F=" << gs.F << " kappa=" << gs.kappa
     << " L=" << gs.L << " M=" << gs.M << " T=" << gs.T
     << " amplitude=" << gs.perturbation.amplitude << " seed=" << gs.perturbation.seed << "\n";
  os << "dahlquist: linear test y' = zeta*y, y(0) = 1; dim 1\n"
     << "  defaults: zeta=-1 T=1\n";
  os << "prothero_robinson: y' = zeta(y - cos t) - sin t with exact solution cos t; dim 2\n"
     << "  defaults: zeta=-1e6 T=1\n";
  os << "polynomial: y(t) = 1 + t + ... + t^degree tracked exactly; dim 2\n"
     << "  defaults: degree=3 T=1\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{
      "Implicit general linear methods with quadratic stability: verification, "
      "stability reports, stiff integration, convergence studies, construction."};
  app.require_subcommand(1);

  std::string verify_target;
  auto* verify = app.add_subcommand("verify", "Check a tableau against its declared tolerances");
  verify->add_option("tableau", verify_target, "built-in method name or tableau file")
      ->required();

  std::string stab_target, stab_csv;
  int stab_grid = 2048;
  double stab_ymax = 1e9;
  auto* stab = app.add_subcommand("stability", "Boundary scan, stability polynomial, limits");
  stab->add_option("tableau", stab_target, "built-in method name or tableau file")->required();
  stab->add_option("--grid-points", stab_grid, "imaginary-axis samples (default 2048)")
      ->check(CLI::PositiveNumber);
  stab->add_option("--y-max", stab_ymax, "largest |y| sampled (default 1e9)");
  stab->add_option("--csv", stab_csv, "write (y, spectral radius) samples to this file");

  std::string int_method, int_problem, int_traj;
  std::vector<std::string> int_params;
  double int_t0 = std::numeric_limits<double>::quiet_NaN();
  double int_tend = std::numeric_limits<double>::quiet_NaN();
  long int_steps = 0;
  auto* integ = app.add_subcommand("integrate", "Fixed-step integration of a named problem");
  integ->add_option("--method", int_method, "built-in method name or tableau file")->required();
  integ->add_option("--problem", int_problem, "problem name (see list-problems)")->required();
  integ->add_option("--param", int_params, "problem parameter key=value (repeatable)");
  integ->add_option("--t0", int_t0, "start time (default: problem's own)");
  integ->add_option("--tend", int_tend, "end time (default: problem's own)");
  integ->add_option("--steps", int_steps, "number of steps")->required()->check(
      CLI::PositiveNumber);
  integ->add_option("--store-trajectory", int_traj, "write per-step states to this CSV");

  std::string conv_spec;
  auto* conv = app.add_subcommand("convergence", "Run a convergence study from a config file");
  conv->add_option("--spec", conv_spec, "study configuration file")->required();

  int cons_order = 0;
  std::string cons_bounds, cons_output, cons_trace;
  auto* cons = app.add_subcommand("construct", "Search a parameter box for a small error constant");
  cons->add_option("--order", cons_order, "family order (1 or 2)")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  cons->add_option("--bounds", cons_bounds, "bounds file: one 'name = lo,hi' line per parameter")
      ->required();
  cons->add_option("--output", cons_output, "tableau output path (default constructed-pP.tableau)");
  cons->add_option("--trace", cons_trace, "write the optimizer evaluation trace to this CSV");

  std::string cert_method;
  auto* cert = app.add_subcommand("certify", "Full check battery for a built-in method");
  cert->add_option("--method", cert_method, "built-in method name")->required();

  auto* listp = app.add_subcommand("list-problems", "Problem names and parameter defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(verify_target);
    if (stab->parsed()) return cmd_stability(stab_target, stab_grid, stab_ymax, stab_csv);
    if (integ->parsed())
      return cmd_integrate(int_method, int_problem, int_params, int_t0, int_tend, int_steps,
                           int_traj);
    if (conv->parsed()) return cmd_convergence(conv_spec);
    if (cons->parsed()) return cmd_construct(cons_order, cons_bounds, cons_output, cons_trace);
    if (cert->parsed()) return cmd_certify(cert_method);
    if (listp->parsed()) return cmd_list_problems();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace glmqs
