#include "fdopt/fdiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fdopt {

const char* to_string(DifferenceScheme scheme) {
  return scheme == DifferenceScheme::forward ? "forward" : "central";
}

double machine_interval(double x_i, DifferenceScheme scheme) {
  static const double kSqrtEps = std::sqrt(kMachineEps);
  static const double kCbrtEps = std::cbrt(kMachineEps);
  const double scale = std::max(1.0, std::abs(x_i));
  return scale * (scheme == DifferenceScheme::forward ? kSqrtEps : kCbrtEps);
}

double noise_optimal_interval(double sigma_f, double curvature, DifferenceScheme scheme) {
  if (!(curvature > 0.0)) throw std::invalid_argument("noise_optimal_interval: curvature must be positive");
  if (!(sigma_f >= 0.0)) throw std::invalid_argument("noise_optimal_interval: negative noise level");
  if (scheme == DifferenceScheme::forward) return std::pow(8.0, 0.25) * std::sqrt(sigma_f / curvature);
  return std::cbrt(3.0 * sigma_f / curvature);
}

double interval(double x_i, const IntervalRule& rule, DifferenceScheme scheme, int coord) {
  if (rule.kind == IntervalRule::Kind::machine_eps) return machine_interval(x_i, scheme);
  if (coord < 0 || coord >= rule.curvature.size())
    throw std::invalid_argument("interval: coordinate outside curvature vector");
  return noise_optimal_interval(rule.sigma_f, rule.curvature[coord], scheme);
}

FdGradient fd_gradient(NoisyOracle& oracle, const Vec& x, DifferenceScheme scheme, const IntervalRule& rule,
                       std::optional<double> fx, int workers) {
  const int n = oracle.dim();
  if (x.size() != n) throw std::invalid_argument("fd_gradient: dimension mismatch");

  Vec h(n);
  for (int i = 0; i < n; ++i) h[i] = interval(x[i], rule, scheme, i);

  const std::uint64_t before = oracle.eval_count();
  FdGradient out;
  out.g.resize(n);

  if (scheme == DifferenceScheme::forward) {
    const double f0 = fx ? *fx : oracle.value(x);
    const std::uint64_t base = oracle.reserve_draws(static_cast<std::uint64_t>(n));
    auto block = [&](int lo, int hi) {
      Vec xt = x;
      for (int i = lo; i < hi; ++i) {
        xt[i] = x[i] + h[i];
        out.g[i] = (oracle.value_at(xt, base + static_cast<std::uint64_t>(i)) - f0) / h[i];
        xt[i] = x[i];
      }
    };
    if (workers <= 1 || n < 2) {
      block(0, n);
    } else {
      const int w = std::min(workers, n);
      std::vector<std::jthread> pool;
      for (int t = 0; t < w; ++t) pool.emplace_back(block, t * n / w, (t + 1) * n / w);
    }
  } else {
    const std::uint64_t base = oracle.reserve_draws(2 * static_cast<std::uint64_t>(n));
    auto block = [&](int lo, int hi) {
      Vec xt = x;
      for (int i = lo; i < hi; ++i) {
        const auto slot = base + 2 * static_cast<std::uint64_t>(i);
        xt[i] = x[i] + h[i];
        const double fp = oracle.value_at(xt, slot);
        xt[i] = x[i] - h[i];
        const double fm = oracle.value_at(xt, slot + 1);
        xt[i] = x[i];
        out.g[i] = (fp - fm) / (2.0 * h[i]);
      }
    };
    if (workers <= 1 || n < 2) {
      block(0, n);
    } else {
      const int w = std::min(workers, n);
      std::vector<std::jthread> pool;
      for (int t = 0; t < w; ++t) pool.emplace_back(block, t * n / w, (t + 1) * n / w);
    }
  }
  out.evals = oracle.eval_count() - before;
  return out;
}

double fd_directional(NoisyOracle& oracle, const Vec& x, const Vec& p, DifferenceScheme scheme, double h,
                      std::optional<double> fx) {
  const double norm = p.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("fd_directional: zero direction");
  if (!(h > 0.0)) throw std::invalid_argument("fd_directional: interval must be positive");
  const Vec pu = p / norm;
  if (scheme == DifferenceScheme::forward) {
    const double f0 = fx ? *fx : oracle.value(x);
    return (oracle.value(x + h * pu) - f0) / h * norm;
  }
  const double fp = oracle.value(x + h * pu);
  const double fm = oracle.value(x - h * pu);
  return (fp - fm) / (2.0 * h) * norm;
}

FdJacobian fd_jacobian(NoisyResidualOracle& oracle, const Vec& x, const Mat& H, std::optional<Vec> base) {
  const int n = oracle.dim();
  const int m = oracle.residual_count();
  if (x.size() != n) throw std::invalid_argument("fd_jacobian: dimension mismatch");
  if (H.rows() != m || H.cols() != n) throw std::invalid_argument("fd_jacobian: interval matrix must be m x n");
  if (!(H.array() > 0.0).all()) throw std::invalid_argument("fd_jacobian: intervals must be positive");
  if (base && base->size() != m) throw std::invalid_argument("fd_jacobian: base residual size mismatch");

  const std::uint64_t before = oracle.component_evals();
  FdJacobian out;
  out.r = base ? *base : oracle.residuals(x);
  out.J.resize(m, n);
  Vec xt = x;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      xt[j] = x[j] + H(i, j);
      out.J(i, j) = (oracle.residual(xt, i) - out.r[i]) / H(i, j);
    }
    xt[j] = x[j];
  }
  out.component_evals = oracle.component_evals() - before;
  return out;
}

double mse_bound(double h, double curvature, double sigma_f, DifferenceScheme scheme) {
  if (!(h > 0.0)) throw std::invalid_argument("mse_bound: h must be positive");
  const double s2 = sigma_f * sigma_f;
  if (scheme == DifferenceScheme::forward) return curvature * curvature * h * h / 4.0 + 2.0 * s2 / (h * h);
  const double h2 = h * h;
  return curvature * curvature * h2 * h2 / 36.0 + s2 / (2.0 * h2);
}

double gradient_noise_level(double sigma_f, double curvature, DifferenceScheme scheme) {
  if (scheme == DifferenceScheme::forward) return std::pow(2.0, 0.25) * std::sqrt(curvature * sigma_f);
  return std::pow(3.0, 1.0 / 6.0) / 2.0 * std::cbrt(curvature) * std::pow(sigma_f, 2.0 / 3.0);
}

double full_gradient_noise_level(const Vec& per_coordinate) { return per_coordinate.norm(); }

}  // namespace fdopt
