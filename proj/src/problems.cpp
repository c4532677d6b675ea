#include "glmqs/problems.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <random>

#include "glmqs/errors.hpp"

namespace glmqs {

namespace {

// Taylor coefficients of the van der Pol solution at t0. The recursion
// divides by eps at every order, so double precision would shed digits to
// cancellation; quad precision keeps all orders accurate to ~1e-28.
struct VdpTaylor {
  // deriv[k] = (y^(k)(t0), z^(k)(t0)) for k = 0..5
  std::array<std::array<double, 2>, 6> deriv;
};

VdpTaylor vdp_taylor(double eps, double y0, double z0) {
  using quad = __float128;
  constexpr int K = 5;
  quad a[K + 1] = {};  // a[k] = y^(k)/k!
  quad b[K + 1] = {};  // b[k] = z^(k)/k!
  a[0] = y0;
  b[0] = z0;
  for (int k = 0; k < K; ++k) {
    a[k + 1] = b[k] / (k + 1);
    quad w = 0;  // Taylor coefficient k of (y^2) z
    for (int m = 0; m <= k; ++m) {
      quad ysq = 0;
      for (int i = 0; i <= m; ++i) ysq += a[i] * a[m - i];
      w += ysq * b[k - m];
    }
    b[k + 1] = (b[k] - w - a[k]) / (quad(eps) * (k + 1));
  }
  VdpTaylor out;
  quad fact = 1;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    out.deriv[k] = {static_cast<double>(fact * a[k]), static_cast<double>(fact * b[k])};
  }
  return out;
}

int cell_neighbors(int M, int i, int j, int out[4]) {
  int n = 0;
  if (i > 0) out[n++] = (i - 1) * M + j;
  if (i < M - 1) out[n++] = (i + 1) * M + j;
  if (j > 0) out[n++] = i * M + (j - 1);
  if (j < M - 1) out[n++] = i * M + (j + 1);
  return n;
}

double param_double(const std::string& key, const std::string& val) {
  try {
    size_t pos = 0;
    const double x = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw ParseError("problem parameter '" + key + "': cannot parse '" + val + "' as a number");
  }
}

long long param_int(const std::string& key, const std::string& val) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw ParseError("problem parameter '" + key + "': cannot parse '" + val + "' as an integer");
  }
}

}  // namespace

OdeSystem vdp_system(const VdpConfig& cfg) {
  if (!(cfg.epsilon > 0)) throw Error("vdp: epsilon must be positive");
  const double eps = cfg.epsilon;
  const double y0 = 2.0;
  const double z0 = -2.0 / 3.0 + (10.0 / 81.0) * eps - (292.0 / 2187.0) * eps * eps -
                    (1814.0 / 19683.0) * eps * eps * eps;

  OdeSystem sys;
  sys.name = "vdp";
  sys.dim = 2;
  sys.t0 = cfg.t0;
  sys.t_end = cfg.T;
  sys.y0 = Vec(2);
  sys.y0 << y0, z0;
  sys.rhs = [eps](const Vec& y) {
    Vec f(2);
    f << y[1], ((1.0 - y[0] * y[0]) * y[1] - y[0]) / eps;
    return f;
  };
  sys.jacobian = [eps](const Vec& y, Mat& J) {
    J = Mat::Zero(2, 2);
    J(0, 1) = 1.0;
    J(1, 0) = (-2.0 * y[0] * y[1] - 1.0) / eps;
    J(1, 1) = (1.0 - y[0] * y[0]) / eps;
  };
  const auto table = std::make_shared<VdpTaylor>(vdp_taylor(eps, y0, z0));
  const double t0 = cfg.t0;
  sys.exact_derivatives = [table, t0](double t, int k) {
    if (t != t0) throw Error("vdp: exact derivatives are available only at the initial time");
    if (k < 0 || k > 4) throw Error("vdp: exact derivatives are available for orders 0..4");
    Vec d(2);
    d << table->deriv[k][0], table->deriv[k][1];
    return d;
  };
  return sys;
}

OdeSystem burgers_system(const BurgersConfig& cfg) {
  if (cfg.M < 3) throw Error("burgers: M must be at least 3");
  const int d = cfg.M - 2;
  const double k = cfg.k();
  const double nu = cfg.d;

  OdeSystem sys;
  sys.name = "burgers";
  sys.dim = d;
  sys.t0 = 0.0;
  sys.t_end = cfg.T;
  sys.structure = BandedJacobian{1, 1};
  sys.y0 = Vec(d);
  for (int i = 0; i < d; ++i) sys.y0[i] = std::sin(M_PI * (i + 1) * k / cfg.L);
  sys.rhs = [d, k, nu](const Vec& u) {
    Vec f(d);
    for (int i = 0; i < d; ++i) {
      const double um = i > 0 ? u[i - 1] : 0.0;          // left Dirichlet value
      const double up = i < d - 1 ? u[i + 1] : 0.0;      // right Dirichlet value
      const double conv = u[i] >= 0.0 ? -u[i] * (u[i] - um) / k : -u[i] * (up - u[i]) / k;
      f[i] = conv + nu * (up - 2.0 * u[i] + um) / (k * k);
    }
    return f;
  };
  sys.jacobian = [d, k, nu](const Vec& u, Mat& J) {
    J = Mat::Zero(d, d);
    const double dk2 = nu / (k * k);
    for (int i = 0; i < d; ++i) {
      const double um = i > 0 ? u[i - 1] : 0.0;
      const double up = i < d - 1 ? u[i + 1] : 0.0;
      const bool bw = u[i] >= 0.0;  // backward-difference branch of the upwind term
      J(i, i) = -2.0 * dk2 + (bw ? -(2.0 * u[i] - um) / k : (2.0 * u[i] - up) / k);
      if (i > 0) J(i, i - 1) = dk2 + (bw ? u[i] / k : 0.0);
      if (i < d - 1) J(i, i + 1) = dk2 + (bw ? 0.0 : -u[i] / k);
    }
  };
  return sys;
}

OdeSystem grayscott_system(const GrayScottConfig& cfg) {
  if (cfg.M < 4) throw Error("grayscott: M must be at least 4");
  const int M = cfg.M;
  const int mm = M * M;
  const double k2 = cfg.k() * cfg.k();
  const double d1 = cfg.d1, d2 = cfg.d2, F = cfg.F, kap = cfg.kappa;

  OdeSystem sys;
  sys.name = "grayscott";
  sys.dim = 2 * mm;
  sys.t0 = 0.0;
  sys.t_end = cfg.T;

  // u = 1, v = 0 except a seeded uniform perturbation on the centered square
  // of side L/4 (cells whose centers fall inside it).
  sys.y0 = Vec(2 * mm);
  sys.y0.head(mm).setOnes();
  sys.y0.tail(mm).setZero();
  {
    std::mt19937_64 rng(cfg.perturbation.seed);
    const double lo = cfg.L / 2.0 - cfg.L / 8.0;
    const double hi = cfg.L / 2.0 + cfg.L / 8.0;
    const double kk = cfg.k();
    for (int i = 0; i < M; ++i) {
      const double ci = (i + 0.5) * kk;
      if (ci < lo || ci > hi) continue;
      for (int j = 0; j < M; ++j) {
        const double cj = (j + 0.5) * kk;
        if (cj < lo || cj > hi) continue;
        const double xi = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        sys.y0[mm + i * M + j] = cfg.perturbation.amplitude * xi;
      }
    }
  }

  sys.rhs = [M, mm, k2, d1, d2, F, kap](const Vec& y) {
    Vec f(2 * mm);
    int nb[4];
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        const int c = i * M + j;
        const int n = cell_neighbors(M, i, j, nb);
        const double u = y[c], v = y[mm + c];
        double lap_u = -n * u, lap_v = -n * v;
        for (int q = 0; q < n; ++q) {
          lap_u += y[nb[q]];
          lap_v += y[mm + nb[q]];
        }
        const double uvv = u * v * v;
        f[c] = d1 * lap_u / k2 - uvv + F * (1.0 - u);
        f[mm + c] = d2 * lap_v / k2 + uvv - (F + kap) * v;
      }
    }
    return f;
  };

  // Sparse pattern: each u row couples to its own five-point u stencil and
  // the v value at the same cell; symmetrically for v rows. The value filler
  // below must walk cells in exactly this order.
  SparseJacobian pattern;
  {
    int nb[4];
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const int c = i * M + j;
        const int n = cell_neighbors(M, i, j, nb);
        pattern.entries.emplace_back(c, c);
        for (int q = 0; q < n; ++q) pattern.entries.emplace_back(c, nb[q]);
        pattern.entries.emplace_back(c, mm + c);
      }
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const int c = i * M + j;
        const int n = cell_neighbors(M, i, j, nb);
        pattern.entries.emplace_back(mm + c, mm + c);
        for (int q = 0; q < n; ++q) pattern.entries.emplace_back(mm + c, mm + nb[q]);
        pattern.entries.emplace_back(mm + c, c);
      }
  }
  sys.structure = pattern;

  sys.sparse_jacobian = [M, mm, k2, d1, d2, F, kap](const Vec& y, std::vector<double>& vals) {
    vals.clear();
    int nb[4];
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const int c = i * M + j;
        const int n = cell_neighbors(M, i, j, nb);
        const double u = y[c], v = y[mm + c];
        vals.push_back(-d1 * n / k2 - v * v - F);
        for (int q = 0; q < n; ++q) vals.push_back(d1 / k2);
        vals.push_back(-2.0 * u * v);
      }
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const int c = i * M + j;
        const int n = cell_neighbors(M, i, j, nb);
        const double u = y[c], v = y[mm + c];
        vals.push_back(-d2 * n / k2 + 2.0 * u * v - (F + kap));
        for (int q = 0; q < n; ++q) vals.push_back(d2 / k2);
        vals.push_back(v * v);
      }
  };
  return sys;
}

OdeSystem dahlquist(double zeta) {
  OdeSystem sys;
  sys.name = "dahlquist";
  sys.dim = 1;
  sys.t0 = 0.0;
  sys.t_end = 1.0;
  sys.y0 = Vec::Ones(1);
  sys.rhs = [zeta](const Vec& y) { return Vec(zeta * y); };
  sys.jacobian = [zeta](const Vec&, Mat& J) { J = Mat::Constant(1, 1, zeta); };
  sys.exact_solution = [zeta](double t) { return Vec(Vec::Constant(1, std::exp(zeta * t))); };
  sys.exact_derivatives = [zeta](double t, int k) {
    return Vec(Vec::Constant(1, std::pow(zeta, k) * std::exp(zeta * t)));
  };
  return sys;
}

OdeSystem polynomial(int degree) {
  if (degree < 0 || degree > 6) throw Error("polynomial: degree must lie in [0, 6]");
  // y(t) = sum_{m<=degree} t^m, integrated as the augmented system
  // (y, tau)' = (P'(tau), 1).
  const auto dpoly = [degree](double t, int k) {
    double acc = 0.0;
    for (int m = degree; m >= k; --m) {
      double c = 1.0;
      for (int q = m; q > m - k; --q) c *= q;
      acc += c * std::pow(t, m - k);
    }
    return acc;
  };
  OdeSystem sys;
  sys.name = "polynomial";
  sys.dim = 2;
  sys.t0 = 0.0;
  sys.t_end = 1.0;
  sys.time_shift = 1;
  sys.y0 = Vec(2);
  sys.y0 << 1.0, 0.0;
  sys.rhs = [dpoly](const Vec& y) {
    Vec f(2);
    f << dpoly(y[1], 1), 1.0;
    return f;
  };
  sys.jacobian = [dpoly](const Vec& y, Mat& J) {
    J = Mat::Zero(2, 2);
    J(0, 1) = dpoly(y[1], 2);
  };
  sys.exact_solution = [dpoly](double t) {
    Vec y(2);
    y << dpoly(t, 0), t;
    return y;
  };
  sys.exact_derivatives = [dpoly](double t, int k) {
    Vec d(2);
    d << dpoly(t, k), (k == 0 ? t : (k == 1 ? 1.0 : 0.0));
    return d;
  };
  return sys;
}

OdeSystem prothero_robinson(double zeta) {
  OdeSystem sys;
  sys.name = "prothero_robinson";
  sys.dim = 2;
  sys.t0 = 0.0;
  sys.t_end = 1.0;
  sys.time_shift = 1;
  sys.y0 = Vec(2);
  sys.y0 << 1.0, 0.0;
  sys.rhs = [zeta](const Vec& y) {
    Vec f(2);
    f << zeta * (y[0] - std::cos(y[1])) - std::sin(y[1]), 1.0;
    return f;
  };
  sys.jacobian = [zeta](const Vec& y, Mat& J) {
    J = Mat::Zero(2, 2);
    J(0, 0) = zeta;
    J(0, 1) = zeta * std::sin(y[1]) - std::cos(y[1]);
  };
  sys.exact_solution = [](double t) {
    Vec y(2);
    y << std::cos(t), t;
    return y;
  };
  sys.exact_derivatives = [](double t, int k) {
    Vec d(2);
    const double c[4] = {std::cos(t), -std::sin(t), -std::cos(t), std::sin(t)};
    d << c[k % 4], (k == 0 ? t : (k == 1 ? 1.0 : 0.0));
    return d;
  };
  return sys;
}

OdeSystem make_problem(const std::string& name,
                       const std::map<std::string, std::string>& params) {
  const auto reject = [&name](const std::string& key) {
    throw ParseError("problem parameter '" + key + "' is not recognized for problem '" + name +
                     "'");
  };
  if (name == "vdp") {
    VdpConfig cfg;
    for (const auto& [key, val] : params) {
      if (key == "epsilon")
        cfg.epsilon = param_double(key, val);
      else if (key == "t0")
        cfg.t0 = param_double(key, val);
      else if (key == "T")
        cfg.T = param_double(key, val);
      else
        reject(key);
    }
    return vdp_system(cfg);
  }
  if (name == "burgers") {
    BurgersConfig cfg;
    for (const auto& [key, val] : params) {
      if (key == "d")
        cfg.d = param_double(key, val);
      else if (key == "L")
        cfg.L = param_double(key, val);
      else if (key == "M")
        cfg.M = static_cast<int>(param_int(key, val));
      else if (key == "T")
        cfg.T = param_double(key, val);
      else
        reject(key);
    }
    return burgers_system(cfg);
  }
  if (name == "grayscott") {
    GrayScottConfig cfg;
    for (const auto& [key, val] : params) {
      if (key == "d1")
        cfg.d1 = param_double(key, val);
      else if (key == "d2")
        cfg.d2 = param_double(key, val);
      else if (key == "F")
        cfg.F = param_double(key, val);
      else if (key == "kappa")
        cfg.kappa = param_double(key, val);
      else if (key == "L")
        cfg.L = param_double(key, val);
      else if (key == "M")
        cfg.M = static_cast<int>(param_int(key, val));
      else if (key == "T")
        cfg.T = param_double(key, val);
      else if (key == "amplitude")
        cfg.perturbation.amplitude = param_double(key, val);
      else if (key == "seed")
        cfg.perturbation.seed = static_cast<unsigned long long>(param_int(key, val));
      else
        reject(key);
    }
    return grayscott_system(cfg);
  }
  if (name == "dahlquist" || name == "prothero_robinson") {
    double zeta = name == "dahlquist" ? -1.0 : -1e6;
    double T = 1.0;
    for (const auto& [key, val] : params) {
      if (key == "zeta")
        zeta = param_double(key, val);
      else if (key == "T")
        T = param_double(key, val);
      else
        reject(key);
    }
    OdeSystem sys = name == "dahlquist" ? dahlquist(zeta) : prothero_robinson(zeta);
    sys.t_end = T;
    return sys;
  }
  if (name == "polynomial") {
    int degree = 3;
    double T = 1.0;
    for (const auto& [key, val] : params) {
      if (key == "degree")
        degree = static_cast<int>(param_int(key, val));
      else if (key == "T")
        T = param_double(key, val);
      else
        reject(key);
    }
    OdeSystem sys = polynomial(degree);
    sys.t_end = T;
    return sys;
  }
  throw ParseError("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
  return {"vdp", "burgers", "grayscott", "dahlquist", "polynomial", "prothero_robinson"};
}

}  // namespace glmqs
