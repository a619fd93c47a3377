#include "fdopt/problem.hpp"

#include "taylor_jet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace fdopt {
namespace {

using detail::Jet;
using detail::value_of;
using std::atan;
using std::exp;
using std::sin;
using std::sqrt;

template <class T>
std::vector<T> to_std(const Vec& x) {
  return std::vector<T>(x.data(), x.data() + x.size());
}

// Jets seeded along direction p.
std::vector<Jet> seed(const Vec& x, const Vec& p) {
  std::vector<Jet> out(static_cast<size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<size_t>(i)] = Jet(x[i], p[i], 0.0);
  return out;
}

std::vector<Jet> seed_unit(const Vec& x, Eigen::Index j) {
  std::vector<Jet> out(static_cast<size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<size_t>(i)] = Jet(x[i], i == j ? 1.0 : 0.0, 0.0);
  return out;
}

// F is a generic callable T f(const std::vector<T>&).
template <class F>
SmoothProblem smooth_problem(std::string name, Vec x0, std::optional<double> phi_star,
                             std::string provenance, F f) {
  SmoothProblem p;
  p.name = std::move(name);
  p.n = static_cast<int>(x0.size());
  p.x0 = std::move(x0);
  p.phi_star = phi_star;
  p.provenance = std::move(provenance);
  p.value = [f](const Vec& x) { return f(to_std<double>(x)); };
  p.gradient = [f](const Vec& x) {
    Vec g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) g[j] = f(seed_unit(x, j)).d1;
    return g;
  };
  p.hessian_quadform = [f](const Vec& x, const Vec& d) { return f(seed(x, d)).d2; };
  return p;
}

// R is a generic callable T r(const std::vector<T>&, int i).
template <class R>
ResidualProblem residual_problem(std::string name, Vec x0, int m, std::optional<double> phi_star,
                                 std::string provenance, R r) {
  ResidualProblem p;
  p.name = std::move(name);
  p.n = static_cast<int>(x0.size());
  p.m = m;
  p.x0 = std::move(x0);
  p.phi_star = phi_star;
  p.provenance = std::move(provenance);
  p.residual = [r](const Vec& x, int i) { return r(to_std<double>(x), i); };
  p.jacobian = [r, m](const Vec& x) {
    Mat J(m, x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const auto xj = seed_unit(x, j);
      for (int i = 0; i < m; ++i) J(i, j) = r(xj, i).d1;
    }
    return J;
  };
  return p;
}

// Smooth form sum_i r_i(x)^2 of a residual definition.
template <class R>
auto sum_of_squares(R r, int m) {
  return [r, m](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::value_type;
    T s(0.0);
    for (int i = 0; i < m; ++i) {
      const T ri = r(x, i);
      s += ri * ri;
    }
    return s;
  };
}

// ---- residual definitions shared by the smooth and least-squares forms

const auto rosenbrock = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  if (i == 0) return T(x[0] - 1.0);
  return T(10.0 * (x[1] - x[0] * x[0]));
};

const auto helix = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (i == 0) {
    T theta = atan(x[1] / x[0]) / two_pi;
    if (value_of(x[0]) < 0.0) theta = theta + 0.5;
    return T(10.0 * (x[2] - 10.0 * theta));
  }
  if (i == 1) return T(10.0 * (sqrt(x[0] * x[0] + x[1] * x[1]) - 1.0));
  return T(x[2]);
};

constexpr std::array<double, 15> kBardY = {0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39,
                                           0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39};
const auto bard = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  const double u = i + 1.0;
  const double v = 16.0 - u;
  const double w = std::min(u, v);
  return T(kBardY[static_cast<size_t>(i)] - (x[0] + u / (v * x[1] + w * x[2])));
};

const auto box3d = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  const double t = 0.1 * (i + 1);
  return T(exp(-t * x[0]) - exp(-t * x[1]) - x[2] * (std::exp(-t) - std::exp(-10.0 * t)));
};

const auto powell_singular = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  switch (i) {
    case 0:
      return T(x[0] + 10.0 * x[1]);
    case 1:
      return T(std::sqrt(5.0) * (x[2] - x[3]));
    case 2: {
      const T d = x[1] - 2.0 * x[2];
      return T(d * d);
    }
    default: {
      const T d = x[0] - x[3];
      return T(std::sqrt(10.0) * d * d);
    }
  }
};

const auto brown_dennis = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  const double t = (i + 1) / 5.0;
  const T a = x[0] + t * x[1] - std::exp(t);
  const T b = x[2] + x[3] * std::sin(t) - std::cos(t);
  return T(a * a + b * b);
};

constexpr std::array<double, 11> kKowalikY = {0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627,
                                              0.0456, 0.0342, 0.0323, 0.0235, 0.0246};
constexpr std::array<double, 11> kKowalikU = {4.0,    2.0,   1.0,   0.5,    0.25,  0.167,
                                              0.125, 0.1,   0.0833, 0.0714, 0.0625};
const auto kowalik_osborne = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  const double u = kKowalikU[static_cast<size_t>(i)];
  return T(kKowalikY[static_cast<size_t>(i)] - x[0] * (u * u + u * x[1]) / (u * u + u * x[2] + x[3]));
};

const auto brown_almost_linear = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  const int n = static_cast<int>(x.size());
  if (i < n - 1) {
    T s(0.0);
    for (const auto& xj : x) s += xj;
    return T(x[static_cast<size_t>(i)] + s - (n + 1.0));
  }
  T prod(1.0);
  for (const auto& xj : x) prod *= xj;
  return T(prod - 1.0);
};

// Linear function, full rank, with m = 45.
const auto linear_full_rank = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  constexpr int m = 45;
  const int n = static_cast<int>(x.size());
  T s(0.0);
  for (const auto& xj : x) s += xj;
  const T common = -(2.0 / m) * s - 1.0;
  if (i < n) return T(x[static_cast<size_t>(i)] + common);
  return common;
};

const auto cube = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  if (i == 0) return T(x[0] - 1.0);
  return T(10.0 * (x[1] - x[0] * x[0] * x[0]));
};

const auto freudenstein_roth = [](const auto& x, int i) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  if (i == 0) return T(-13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1]);
  return T(-29.0 + x[0] + ((x[1] + 1.0) * x[1] - 14.0) * x[1]);
};

// ---- smooth-only definitions (CUTEst algebraic forms)

const auto denschne = [](const auto& x) {
  const auto a = x[1] + x[1] * x[1];
  const auto b = exp(x[2]) - 1.0;
  return x[0] * x[0] + a * a + b * b;
};

const auto tridia = [](const auto& x) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  T s = (x[0] - 1.0) * (x[0] - 1.0);
  for (size_t i = 1; i < x.size(); ++i) {
    const T d = 2.0 * x[i] - x[i - 1];
    s += static_cast<double>(i + 1) * d * d;
  }
  return s;
};

const auto dqrtic = [](const auto& x) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  T s(0.0);
  for (size_t i = 0; i < x.size(); ++i) {
    const T d = x[i] - static_cast<double>(i + 1);
    const T d2 = d * d;
    s += d2 * d2;
  }
  return s;
};

const auto arwhead = [](const auto& x) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  const size_t n = x.size();
  const T xn2 = x[n - 1] * x[n - 1];
  T s(0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    const T q = x[i] * x[i] + xn2;
    s += q * q - 4.0 * x[i] + 3.0;
  }
  return s;
};

const auto nondia = [](const auto& x) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  T s = (x[0] - 1.0) * (x[0] - 1.0);
  for (size_t i = 1; i < x.size(); ++i) {
    const T d = x[0] - x[i - 1] * x[i - 1];
    s += 100.0 * d * d;
  }
  return s;
};

const auto engval1 = [](const auto& x) {
  using T = typename std::decay_t<decltype(x)>::value_type;
  T s(0.0);
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    const T q = x[i] * x[i] + x[i + 1] * x[i + 1];
    s += q * q - 4.0 * x[i] + 3.0;
  }
  return s;
};

const auto sineval = [](const auto& x) {
  const auto d = x[1] - sin(x[0]);
  return 1.0e4 * d * d + 0.25 * x[0] * x[0];
};

const auto brkmcc = [](const auto& x) {
  const auto c = 1.0 - 0.25 * x[0] * x[0] - x[1] * x[1];
  const auto d = x[0] - 2.0 * x[1] + 1.0;
  return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] - 1.0) * (x[1] - 1.0) + 0.04 / c + 5.0 * d * d;
};

Vec filled(int n, double v) { return Vec::Constant(n, v); }

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out[i++] = e;
  return out;
}

struct SharedDef {
  const char* name;
  Vec x0;
  int m;
  std::optional<double> sum_sq_star;  // optimum of sum r_i^2
  std::optional<Vec> minimizer;
};

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> out;
  const std::string mgh = "More, Garbow & Hillstrom (1981) test set";
  const std::string cutest = "CUTEst algebraic definition";

  auto add_shared = [&](const SharedDef& d, auto r, bool smooth_form, bool residual_form) {
    CatalogEntry e;
    e.name = d.name;
    if (smooth_form)
      e.smooth = smooth_problem(d.name, d.x0, d.sum_sq_star, cutest + " (sum of squared residuals)",
                                sum_of_squares(r, d.m));
    if (residual_form) {
      std::optional<double> half;
      if (d.sum_sq_star) half = 0.5 * *d.sum_sq_star;
      e.residual = residual_problem(d.name, d.x0, d.m, half, mgh, r);
    }
    e.known_minimizer = d.minimizer;
    out.push_back(std::move(e));
  };
  auto add_smooth = [&](const char* name, Vec x0, std::optional<double> phi_star, auto f,
                        std::optional<Vec> minimizer = std::nullopt) {
    CatalogEntry e;
    e.name = name;
    e.smooth = smooth_problem(name, std::move(x0), phi_star, cutest, f);
    e.known_minimizer = std::move(minimizer);
    out.push_back(std::move(e));
  };

  add_shared({"ROSENBR", vec({-1.2, 1.0}), 2, 0.0, vec({1.0, 1.0})}, rosenbrock, true, true);
  add_shared({"HELIX", vec({-1.0, 0.0, 0.0}), 3, 0.0, vec({1.0, 0.0, 0.0})}, helix, true, true);
  add_shared({"BARD", vec({1.0, 1.0, 1.0}), 15, 8.21487730657898e-3, std::nullopt}, bard, true, true);
  add_shared({"BOX3D", vec({0.0, 10.0, 20.0}), 10, 0.0, vec({1.0, 10.0, 1.0})}, box3d, true, true);
  add_shared({"POWELLSG", vec({3.0, -1.0, 0.0, 1.0}), 4, 0.0, Vec::Zero(4)}, powell_singular, true, true);
  add_shared({"BROWNDEN", vec({25.0, 5.0, -5.0, -1.0}), 20, 85822.20162635695, std::nullopt}, brown_dennis,
             false, true);
  add_shared({"KOWOSB", vec({0.25, 0.39, 0.415, 0.39}), 11, 3.0750560384923745e-4, std::nullopt},
             kowalik_osborne, false, true);
  add_shared({"BROWNAL", filled(10, 0.5), 10, 0.0, filled(10, 1.0)}, brown_almost_linear, false, true);
  add_shared({"LINFULL", filled(9, 1.0), 45, 36.0, filled(9, -1.0)}, linear_full_rank, true, true);
  add_shared({"CUBE", vec({-1.2, 1.0}), 2, 0.0, vec({1.0, 1.0})}, cube, true, false);
  // From x0 = (0.5, -2) the descent path ends in the local minimizer near
  // (11.41, -0.897), not the global one at (5, 4).
  add_shared({"FREUROTH", vec({0.5, -2.0}), 2, 48.98425367924005, std::nullopt}, freudenstein_roth, true,
             false);

  add_smooth("DENSCHNE", vec({2.0, 3.0, -8.0}), 0.0, denschne, vec({0.0, 0.0, 0.0}));
  add_smooth("TRIDIA", filled(10, 1.0), 0.0, tridia, Vec{[] {
               Vec x(10);
               for (int i = 0; i < 10; ++i) x[i] = std::ldexp(1.0, -i);
               return x;
             }()});
  add_smooth("DQRTIC", filled(10, 2.0), 0.0, dqrtic, Vec{Vec::LinSpaced(10, 1.0, 10.0)});
  add_smooth("ARWHEAD", filled(100, 1.0), 0.0, arwhead, [] {
    Vec x = Vec::Ones(100);
    x[99] = 0.0;
    return x;
  }());
  add_smooth("NONDIA", filled(10, -1.0), 0.0, nondia, filled(10, 1.0));
  add_smooth("ENGVAL1", filled(2, 2.0), 0.0, engval1, vec({1.0, 0.0}));
  add_smooth("SINEVAL", vec({4.712389, -1.0}), 0.0, sineval, vec({0.0, 0.0}));
  add_smooth("BRKMCC", vec({2.0, 2.0}), 0.16904267919645788, brkmcc);
  return out;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

std::optional<SmoothProblem> find_smooth(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name && e.smooth) return e.smooth;
  return std::nullopt;
}

std::optional<ResidualProblem> find_residual(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name && e.residual) return e.residual;
  return std::nullopt;
}

const CatalogEntry* find_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return &e;
  return nullptr;
}

const std::vector<std::string>& core_smooth_names() {
  static const std::vector<std::string> names = {
      "ROSENBR", "CUBE",   "DENSCHNE", "HELIX",  "BARD",    "BOX3D",   "POWELLSG", "FREUROTH",
      "TRIDIA",  "DQRTIC", "ARWHEAD",  "NONDIA", "ENGVAL1", "SINEVAL", "BRKMCC"};
  return names;
}

const std::vector<std::string>& core_residual_names() {
  static const std::vector<std::string> names = {"ROSENBR",  "HELIX",    "BARD",   "BOX3D",
                                                 "POWELLSG", "BROWNDEN", "KOWOSB", "BROWNAL"};
  return names;
}

SmoothProblem make_diagonal_quadratic(const Vec& diag, const Vec& x0, std::string name) {
  if (diag.size() != x0.size()) throw std::invalid_argument("make_diagonal_quadratic: size mismatch");
  SmoothProblem p;
  p.name = std::move(name);
  p.n = static_cast<int>(diag.size());
  p.x0 = x0;
  p.phi_star = 0.0;
  p.provenance = "diagonal quadratic 1/2 x^T diag(a) x";
  p.value = [diag](const Vec& x) { return 0.5 * x.dot(diag.cwiseProduct(x)); };
  p.gradient = [diag](const Vec& x) -> Vec { return diag.cwiseProduct(x); };
  p.hessian_quadform = [diag](const Vec&, const Vec& d) { return d.dot(diag.cwiseProduct(d)); };
  return p;
}

ResidualProblem make_affine_residual(const Mat& A, const Vec& b, const Vec& x0, std::string name) {
  if (A.rows() != b.size() || A.cols() != x0.size())
    throw std::invalid_argument("make_affine_residual: size mismatch");
  ResidualProblem p;
  p.name = std::move(name);
  p.n = static_cast<int>(A.cols());
  p.m = static_cast<int>(A.rows());
  p.x0 = x0;
  p.provenance = "affine residual A x - b";
  p.residual = [A, b](const Vec& x, int i) { return A.row(i).dot(x) - b[i]; };
  p.jacobian = [A](const Vec&) -> Mat { return A; };
  return p;
}

}  // namespace fdopt
