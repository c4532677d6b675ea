#include "glmqs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "glmqs/errors.hpp"
#include "glmqs/problems.hpp"
#include "glmqs/tableau.hpp"

namespace glmqs {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double estimate_order(double e1, double e2, long N1, long N2) {
  if (!(e1 > 0.0) || !(e2 > 0.0))
    throw Error("estimate_order: error norms must be positive (got " + fmt17(e1) + ", " +
                fmt17(e2) + ")");
  if (N1 <= 0 || N2 <= N1) throw Error("estimate_order: step counts must satisfy N2 > N1 > 0");
  return std::log(e1 / e2) / std::log(static_cast<double>(N2) / static_cast<double>(N1));
}

ReferenceResult reference_solution(const OdeSystem& sys, double t0, double T,
                                   const NewtonConfig& cfg) {
  ReferenceResult ref;
  if (sys.exact_solution) {
    ref.y = sys.exact_solution(T);
    ref.exact = true;
    ref.source = "exact";
    return ref;
  }
  const GlmTableau t4 = builtin_tableau("GLMQS-4");
  IntegrateOptions opts;
  opts.newton = cfg;
  constexpr long kCap = 1L << 20;
  long N = 64;
  Vec prev = integrate(t4, sys, t0, T, N, opts).y_end;
  double gap = std::numeric_limits<double>::infinity();
  while (2 * N <= kCap) {
    N *= 2;
    const Vec cur = integrate(t4, sys, t0, T, N, opts).y_end;
    gap = (cur - prev).norm() / std::max(cur.norm(), 1e-300);
    if (gap <= 1e-11) {
      ref.y = cur;
      ref.gap = gap;
      ref.n_used = N;
      ref.source = "self-refined";
      return ref;
    }
    prev = cur;
  }
  throw ReferenceFailure(gap, "reference did not stabilize by N = 2^20 (last relative gap " +
                                  fmt17(gap) + ")");
}

// ---------------------------------------------------------------------------
// Study configuration
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double parse_num(const std::string& key, const std::string& val) {
  try {
    size_t pos = 0;
    const double x = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw ParseError("study key '" + key + "': cannot parse '" + val + "' as a number");
  }
}

long parse_count(const std::string& key, const std::string& val) {
  try {
    size_t pos = 0;
    const long x = std::stol(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw ParseError("study key '" + key + "': cannot parse '" + val + "' as an integer");
  }
}

}  // namespace

StudySpec parse_study_spec(std::istream& in, const std::string& origin) {
  StudySpec spec;
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto at = [&](const std::string& what) {
      return origin + ":" + std::to_string(lineno) + ": " + what;
    };
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(at("expected key = value"));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(at("empty key"));
    if (seen[key]) throw ParseError(at("duplicate key '" + key + "'"));
    seen[key] = true;

    if (key == "methods") {
      spec.methods = split_list(val);
    } else if (key == "problem.name") {
      spec.problem_name = val;
    } else if (key.rfind("problem.", 0) == 0) {
      spec.problem_params[key.substr(8)] = val;
    } else if (key == "study.N") {
      for (const auto& tok : split_list(val)) spec.n_list.push_back(parse_count(key, tok));
    } else if (key == "study.norm") {
      if (val == "absolute-L2")
        spec.norm = StudySpec::Norm::absolute_l2;
      else if (val == "relative-L2")
        spec.norm = StudySpec::Norm::relative_l2;
      else
        throw ParseError(at("study.norm must be absolute-L2 or relative-L2"));
    } else if (key == "study.reference") {
      spec.reference = val;
    } else if (key == "study.t0") {
      spec.t0 = parse_num(key, val);
    } else if (key == "study.T") {
      spec.T = parse_num(key, val);
    } else if (key == "output.dir") {
      spec.output_dir = val;
    } else if (key == "newton.rel_tol") {
      spec.newton.rel_tol = parse_num(key, val);
    } else if (key == "newton.abs_tol") {
      spec.newton.abs_tol = parse_num(key, val);
    } else if (key == "newton.max_iters") {
      spec.newton.max_iters = static_cast<int>(parse_count(key, val));
    } else if (key == "newton.divergence_factor") {
      spec.newton.divergence_factor = parse_num(key, val);
    } else if (key == "jacobian.reuse") {
      if (val == "per-step")
        spec.newton.jacobian_reuse = NewtonConfig::JacobianReuse::per_step;
      else if (val == "per-stage")
        spec.newton.jacobian_reuse = NewtonConfig::JacobianReuse::per_stage;
      else if (val == "never")
        spec.newton.jacobian_reuse = NewtonConfig::JacobianReuse::never;
      else
        throw ParseError(at("jacobian.reuse must be per-step, per-stage, or never"));
    } else {
      throw ParseError(at("unknown key '" + key + "'"));
    }
  }

  if (spec.methods.empty()) throw ParseError(origin + ": 'methods' is required");
  if (spec.problem_name.empty()) throw ParseError(origin + ": 'problem.name' is required");
  if (spec.n_list.empty()) throw ParseError(origin + ": 'study.N' is required");
  for (size_t i = 0; i + 1 < spec.n_list.size(); ++i)
    if (spec.n_list[i + 1] <= spec.n_list[i])
      throw ParseError(origin + ": study.N must be strictly increasing");
  if (spec.n_list.front() <= 0) throw ParseError(origin + ": step counts must be positive");
  return spec;
}

StudySpec parse_study_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open study spec '" + path + "'");
  return parse_study_spec(in, path);
}

// ---------------------------------------------------------------------------
// Study driver
// ---------------------------------------------------------------------------

namespace {

int pool_size(size_t njobs) {
  long n = 0;
  if (const char* env = std::getenv("GLMQS_THREADS"); env && *env)
    n = std::strtol(env, nullptr, 10);
  if (n <= 0) n = static_cast<long>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return static_cast<int>(std::min<long>(n, static_cast<long>(std::max<size_t>(njobs, 1))));
}

std::vector<std::string> resolved_config_lines(const StudySpec& spec) {
  std::vector<std::string> out;
  std::string m;
  for (const auto& name : spec.methods) m += (m.empty() ? "" : ",") + name;
  out.push_back("methods = " + m);
  out.push_back("problem.name = " + spec.problem_name);
  for (const auto& [k, v] : spec.problem_params) out.push_back("problem." + k + " = " + v);
  std::string ns;
  for (const auto n : spec.n_list) ns += (ns.empty() ? "" : ",") + std::to_string(n);
  out.push_back("study.N = " + ns);
  out.push_back(std::string("study.norm = ") +
                (spec.norm == StudySpec::Norm::absolute_l2 ? "absolute-L2" : "relative-L2"));
  out.push_back("study.reference = " + spec.reference);
  if (!std::isnan(spec.t0)) out.push_back("study.t0 = " + fmt17(spec.t0));
  if (!std::isnan(spec.T)) out.push_back("study.T = " + fmt17(spec.T));
  out.push_back("output.dir = " + spec.output_dir);
  out.push_back("newton.rel_tol = " + fmt17(spec.newton.rel_tol));
  out.push_back("newton.abs_tol = " + fmt17(spec.newton.abs_tol));
  out.push_back("newton.max_iters = " + std::to_string(spec.newton.max_iters));
  out.push_back("newton.divergence_factor = " + fmt17(spec.newton.divergence_factor));
  const char* reuse = spec.newton.jacobian_reuse == NewtonConfig::JacobianReuse::per_step
                          ? "per-step"
                          : spec.newton.jacobian_reuse == NewtonConfig::JacobianReuse::per_stage
                                ? "per-stage"
                                : "never";
  out.push_back(std::string("jacobian.reuse = ") + reuse);
  return out;
}

Vec load_reference_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open reference file '" + path + "'");
  Vec y(dim);
  for (int i = 0; i < dim; ++i)
    if (!(in >> y[i]))
      throw ParseError("reference file '" + path + "' holds fewer than " + std::to_string(dim) +
                       " values");
  return y;
}

}  // namespace

StudyResult run_study(const StudySpec& spec) {
  const OdeSystem sys = make_problem(spec.problem_name, spec.problem_params);
  const double t0 = std::isnan(spec.t0) ? sys.t0 : spec.t0;
  const double T = std::isnan(spec.T) ? sys.t_end : spec.T;
  if (!(T > t0)) throw Error("study: final time must exceed the initial time");

  std::vector<GlmTableau> methods;
  methods.reserve(spec.methods.size());
  for (const auto& name : spec.methods) methods.push_back(load_tableau(name));

  StudyResult out;
  if (spec.reference == "self") {
    out.reference = reference_solution(sys, t0, T, spec.newton);
  } else {
    out.reference.y = load_reference_file(spec.reference, sys.dim);
    out.reference.source = spec.reference;
  }
  const Vec& ref = out.reference.y;
  const double ref_norm = std::max(ref.norm(), 1e-300);

  // Every (method, N) cell is measured against the one reference above.
  out.rows.resize(methods.size() * spec.n_list.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t idx; (idx = next.fetch_add(1)) < out.rows.size();) {
      const size_t mi = idx / spec.n_list.size();
      const long N = spec.n_list[idx % spec.n_list.size()];
      ConvergenceRow& row = out.rows[idx];
      row.method = methods[mi].name;
      row.N = N;
      row.h = (T - t0) / static_cast<double>(N);
      try {
        IntegrateOptions opts;
        opts.newton = spec.newton;
        const Vec y = integrate(methods[mi], sys, t0, T, N, opts).y_end;
        row.error = (y - ref).norm();
        if (spec.norm == StudySpec::Norm::relative_l2) row.error /= ref_norm;
      } catch (const Error& e) {
        row.failed = true;
        row.failure = e.what();
      }
    }
  };
  const int nthreads = pool_size(out.rows.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < nthreads; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  // Order estimates pair each successful row with the previous success of
  // the same method.
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    const ConvergenceRow* prev = nullptr;
    for (size_t j = 0; j < spec.n_list.size(); ++j) {
      ConvergenceRow& row = out.rows[mi * spec.n_list.size() + j];
      if (row.failed || !(row.error > 0.0)) {
        if (!row.failed) prev = &row;  // zero error: exact; no slope from here
        continue;
      }
      if (prev && prev->error > 0.0)
        row.observed_p = estimate_order(prev->error, row.error, prev->N, row.N);
      prev = &row;
    }
  }

  // Report: reference provenance plus finest-N summary per method.
  std::ostringstream rep;
  for (const auto& line : resolved_config_lines(spec)) rep << line << "\n";
  rep << "reference.source = " << out.reference.source << "\n";
  rep << "reference.gap = " << fmt17(out.reference.gap) << "\n";
  rep << "reference.steps = " << out.reference.n_used << "\n";
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    const std::string& name = methods[mi].name;
    rep << name << ".nominal_p = " << methods[mi].p << "\n";
    const ConvergenceRow* last = nullptr;
    for (size_t j = 0; j < spec.n_list.size(); ++j) {
      const ConvergenceRow& row = out.rows[mi * spec.n_list.size() + j];
      if (!row.failed) last = &row;
    }
    if (!last) {
      rep << name << ".status = all runs failed\n";
      continue;
    }
    rep << name << ".finest_N = " << last->N << "\n";
    rep << name << ".finest_error = " << fmt17(last->error) << "\n";
    if (!std::isnan(last->observed_p))
      rep << name << ".observed_p = " << fmt17(last->observed_p) << "\n";
  }
  for (const auto& row : out.rows)
    if (row.failed)
      rep << row.method << ".N" << row.N << ".failure = " << row.failure << "\n";
  out.report = rep.str();
  return out;
}

void write_study_outputs(const StudySpec& spec, const StudyResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir);
  const auto header = resolved_config_lines(spec);

  {
    std::ofstream csv(fs::path(spec.output_dir) / "convergence.csv");
    if (!csv) throw Error("cannot write convergence.csv in '" + spec.output_dir + "'");
    for (const auto& line : header) csv << "# " << line << "\n";
    csv << "method,N,h,error,observed_p\n";
    for (const auto& row : result.rows) {
      csv << row.method << "," << row.N << "," << fmt17(row.h) << ",";
      if (row.failed)
        csv << "failed,";
      else
        csv << fmt17(row.error) << ",";
      if (!std::isnan(row.observed_p)) csv << fmt17(row.observed_p);
      csv << "\n";
    }
  }
  {
    std::ofstream csv(fs::path(spec.output_dir) / "loglog.csv");
    if (!csv) throw Error("cannot write loglog.csv in '" + spec.output_dir + "'");
    for (const auto& line : header) csv << "# " << line << "\n";
    csv << "method,log10_h,log10_error\n";
    for (const auto& row : result.rows) {
      if (row.failed || !(row.error > 0.0)) continue;
      csv << row.method << "," << fmt17(std::log10(row.h)) << ","
          << fmt17(std::log10(row.error)) << "\n";
    }
  }
  {
    std::ofstream rep(fs::path(spec.output_dir) / "report.txt");
    if (!rep) throw Error("cannot write report.txt in '" + spec.output_dir + "'");
    rep << result.report;
  }
}

}  // namespace glmqs
