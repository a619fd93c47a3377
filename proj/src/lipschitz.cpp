#include "fdopt/lipschitz.hpp"

#include "fdopt/fdiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdopt {
namespace {

void require_hessian(const SmoothProblem& problem, const char* what) {
  if (!problem.has_hessian())
    throw std::logic_error(std::string(what) + ": problem " + problem.name + " has no Hessian hook");
}

LipschitzEstimate floored(Vec raw, std::string method, CurvatureOrder order = CurvatureOrder::second) {
  LipschitzEstimate est;
  est.order = order;
  est.method = std::move(method);
  est.floor_applied.resize(static_cast<size_t>(raw.size()));
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    est.floor_applied[static_cast<size_t>(i)] = !(raw[i] >= kCurvatureFloor);
    raw[i] = std::max(kCurvatureFloor, raw[i]);
  }
  est.values = std::move(raw);
  return est;
}

Vec unit(Eigen::Index n, Eigen::Index i) {
  Vec e = Vec::Zero(n);
  e[i] = 1.0;
  return e;
}

}  // namespace

double second_difference(NoisyOracle& oracle, const Vec& x, const Vec& p, double t, std::optional<double> fx) {
  if (!(t > 0.0)) throw std::invalid_argument("second_difference: t must be positive");
  if (std::abs(p.norm() - 1.0) > 1e-12) throw std::invalid_argument("second_difference: p must be a unit vector");
  const double f0 = fx ? *fx : oracle.value(x);
  return oracle.value(x + t * p) - 2.0 * f0 + oracle.value(x - t * p);
}

bool relative_change_ok(const MWProbe& probe, const MWParams& params) {
  const auto ok = [&](double ft) {
    return std::abs(ft - probe.f0) <= params.tau2 * std::max(std::abs(probe.f0), std::abs(ft));
  };
  return ok(probe.f_plus) && ok(probe.f_minus);
}

bool mw_conditions_hold(const MWProbe& probe, double noise_scale, const MWParams& params) {
  return std::abs(probe.delta()) >= params.tau1 * noise_scale && relative_change_ok(probe, params);
}

MWResult mw_estimate(const SampleFn& f, const Vec& x, const Vec& p, double sigma_f, const MWParams& params,
                     std::optional<double> fx) {
  if (!(params.tau1 > 1.0) || !(params.tau2 > 0.0 && params.tau2 < 1.0) || !(params.growth > 1.0) ||
      params.max_iters < 1)
    throw std::invalid_argument("mw_estimate: invalid parameters");
  if (!(sigma_f >= 0.0)) throw std::invalid_argument("mw_estimate: negative noise level");

  MWResult result;
  const double f0 = fx ? *fx : f(x);
  if (!fx) ++result.evals;

  result.noise_scale = sigma_f > 0.0 ? sigma_f : kMachineEps * std::max(1.0, std::abs(f0));
  double t = sigma_f > 0.0 ? std::pow(sigma_f, 0.25) * std::max(1.0, std::abs(x.dot(p)))
                           : std::pow(kMachineEps, 0.25);
  // Largest width known to be too small and smallest known to be too large.
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();

  for (int k = 0; k < params.max_iters; ++k) {
    MWProbe probe{t, f0, f(x + t * p), f(x - t * p)};
    result.evals += 2;
    result.probes.push_back(probe);

    const bool enough_signal = std::abs(probe.delta()) >= params.tau1 * result.noise_scale;
    const bool change_ok = relative_change_ok(probe, params);
    if (enough_signal && change_ok) {
      result.success = true;
      result.estimate = std::max(kCurvatureFloor, std::abs(probe.delta()) / (t * t));
      return result;
    }
    if (!enough_signal && !change_ok) return result;
    if (!enough_signal)
      t_lo = t;
    else
      t_hi = t;
    if (t_lo > 0.0 && std::isfinite(t_hi))
      t = std::sqrt(t_lo * t_hi);
    else
      t = enough_signal ? t / params.growth : t * params.growth;
  }
  return result;
}

MWResult mw_estimate(NoisyOracle& oracle, const Vec& x, const Vec& p, double sigma_f, const MWParams& params,
                     std::optional<double> fx) {
  if (std::abs(p.norm() - 1.0) > 1e-12) throw std::invalid_argument("mw_estimate: p must be a unit vector");
  return mw_estimate([&oracle](const Vec& y) { return oracle.value(y); }, x, p, sigma_f, params, fx);
}

LipschitzEstimate estimate_component_lipschitz(NoisyOracle& oracle, const Vec& x, double sigma_f,
                                               const MWParams& params, std::optional<double> fx) {
  const Eigen::Index n = x.size();
  const std::uint64_t before = oracle.eval_count();
  const double f0 = fx ? *fx : oracle.value(x);
  Vec raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const MWResult r = mw_estimate(oracle, x, unit(n, i), sigma_f, params, f0);
    // Failures map to 0 so that the floor is applied and flagged.
    raw[i] = r.success ? r.estimate : 0.0;
  }
  LipschitzEstimate est = floored(std::move(raw), "mw_component");
  est.evals_spent = oracle.eval_count() - before;
  return est;
}

double directional_curvature(const LipschitzEstimate& estimate) {
  if (estimate.values.size() == 0) throw std::invalid_argument("directional_curvature: empty estimate");
  return estimate.values.norm() / std::sqrt(static_cast<double>(estimate.values.size()));
}

AdaptiveState adaptive_maybe_reestimate(const AdaptiveState& state, NoisyOracle& oracle, const Vec& x_k,
                                        double sigma_f, const MWParams& params, std::optional<double> fx) {
  if (!(state.last_alpha < state.reestimate_threshold)) return state;
  AdaptiveState next = state;
  const std::uint64_t spent_before = state.current.evals_spent;
  next.current = estimate_component_lipschitz(oracle, x_k, sigma_f, params, fx);
  next.current.evals_spent += spent_before;
  return next;
}

Vec hessian_diagonal(const SmoothProblem& problem, const Vec& x) {
  require_hessian(problem, "hessian_diagonal");
  Vec d(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) d[i] = problem.hessian_quadform(x, unit(x.size(), i));
  return d;
}

double hessian_spectral_norm(const SmoothProblem& problem, const Vec& x, int iterations) {
  require_hessian(problem, "hessian_spectral_norm");
  const Eigen::Index n = x.size();
  // (H v)_i = (q(e_i + v) - q(e_i - v)) / 4 by polarization.
  auto hess_times = [&](const Vec& v) {
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec e = unit(n, i);
      out[i] = 0.25 * (problem.hessian_quadform(x, e + v) - problem.hessian_quadform(x, e - v));
    }
    return out;
  };
  Vec v = Vec::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double norm = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Vec hv = hess_times(v);
    norm = hv.norm();
    if (norm == 0.0) return 0.0;
    v = hv / norm;
  }
  return norm;
}

bool scheme_is_pointwise(int scheme) { return scheme >= 6 && scheme <= 9; }

LipschitzEstimate estimate_scheme(int scheme, const SmoothProblem& problem, const Vec& x) {
  if (scheme < 1 || scheme > 9) throw std::invalid_argument("estimate_scheme: scheme must be in 1..9");
  const Eigen::Index n = x.size();
  const std::string tag = "scheme-" + std::to_string(scheme);
  if (scheme == 1) return floored(Vec::Ones(n), tag);

  const int base = scheme > 5 ? scheme - 4 : scheme;
  if (base == 2) return floored(Vec::Constant(n, hessian_spectral_norm(problem, x)), tag);
  const Vec diag = hessian_diagonal(problem, x).cwiseAbs();
  switch (base) {
    case 3:
      return floored(Vec::Constant(n, diag.mean()), tag);
    case 4:
      return floored(Vec::Constant(n, diag.norm() / std::sqrt(static_cast<double>(n))), tag);
    default:
      return floored(diag, tag);
  }
}

double scheme_directional(int scheme, const SmoothProblem& problem, const LipschitzEstimate& estimate,
                          const Vec& x, const Vec& p) {
  if (scheme == 9) {
    require_hessian(problem, "scheme_directional");
    return std::max(kCurvatureFloor, std::abs(problem.hessian_quadform(x, p)) / p.squaredNorm());
  }
  return directional_curvature(estimate);
}

double third_derivative_estimate(const SmoothProblem& problem, const Vec& x, const Vec& p) {
  require_hessian(problem, "third_derivative_estimate");
  const double norm = p.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("third_derivative_estimate: zero direction");
  static const double kStep = std::sqrt(kMachineEps);
  const double change = problem.hessian_quadform(x + kStep * (p / norm), p) - problem.hessian_quadform(x, p);
  return std::max(kCurvatureFloor, std::abs(change) / (kStep * norm * norm));
}

LipschitzEstimate third_derivative_components(const SmoothProblem& problem, const Vec& x) {
  Vec raw(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) raw[i] = third_derivative_estimate(problem, x, unit(x.size(), i));
  return floored(std::move(raw), "third-derivative", CurvatureOrder::third);
}

Mat idealized_residual_lipschitz(const ResidualProblem& problem, const Vec& x) {
  if (x.size() != problem.n) throw std::invalid_argument("idealized_residual_lipschitz: dimension mismatch");
  static const double kStep = std::pow(kMachineEps, 0.25);
  Mat L(problem.m, problem.n);
  Vec xp = x, xm = x;
  for (int j = 0; j < problem.n; ++j) {
    xp[j] = x[j] + kStep;
    xm[j] = x[j] - kStep;
    for (int i = 0; i < problem.m; ++i) {
      const double d = problem.residual(xp, i) + problem.residual(xm, i) - 2.0 * problem.residual(x, i);
      L(i, j) = std::abs(d) / (kStep * kStep);
    }
    xp[j] = xm[j] = x[j];
  }
  return L;
}

Mat floor_curvature(const Mat& L, double floor) { return L.cwiseMax(floor); }

ResidualLipschitz estimate_residual_lipschitz(NoisyResidualOracle& oracle, const Vec& x, double sigma_f,
                                              const MWParams& params, double failure_value) {
  const int m = oracle.residual_count();
  const int n = oracle.dim();
  const std::uint64_t before = oracle.component_evals();
  ResidualLipschitz out;
  out.values.resize(m, n);
  for (int i = 0; i < m; ++i) {
    const SampleFn component = [&oracle, i](const Vec& y) { return oracle.residual(y, i); };
    const double r0 = component(x);
    for (int j = 0; j < n; ++j) {
      const MWResult r = mw_estimate(component, x, unit(n, j), sigma_f, params, r0);
      if (r.success) {
        out.values(i, j) = r.estimate;
      } else {
        out.values(i, j) = failure_value;
        ++out.failures;
      }
    }
  }
  out.component_evals = oracle.component_evals() - before;
  return out;
}

}  // namespace fdopt
