#include "fdopt/leastsq.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdopt {

const char* to_string(LipschitzPolicy policy) {
  switch (policy) {
    case LipschitzPolicy::initial_only:
      return "initial_only";
    case LipschitzPolicy::idealized_per_iteration:
      return "idealized_per_iteration";
    default:
      return "unit";
  }
}

std::optional<LipschitzPolicy> lipschitz_policy_from_string(const std::string& text) {
  for (auto p : {LipschitzPolicy::initial_only, LipschitzPolicy::idealized_per_iteration, LipschitzPolicy::unit})
    if (text == to_string(p)) return p;
  return std::nullopt;
}

void LmConfig::validate(int n) const {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("lm: need 0 < eta < 1");
  if (!(shrink > 0.0 && shrink < 1.0 && expand > 1.0)) throw std::invalid_argument("lm: need shrink < 1 < expand");
  if (!(delta0 > 0.0)) throw std::invalid_argument("lm: initial radius must be positive");
  if (!(min_radius > 0.0)) throw std::invalid_argument("lm: minimum radius must be positive");
  if (!(sigma_f >= 0.0)) throw std::invalid_argument("lm: negative noise level");
  if (budget(n) < n + 1.0) throw std::invalid_argument("lm: budget below one Jacobian");
}

GaussNewtonModel build_model(const Mat& J, const Vec& r) {
  if (J.rows() != r.size()) throw std::invalid_argument("build_model: Jacobian rows must match residual count");
  GaussNewtonModel model;
  model.g = J.transpose() * r;
  model.H = J.transpose() * J;
  // Symmetrize exactly; the product is symmetric only up to rounding.
  model.H = 0.5 * (model.H + model.H.transpose()).eval();
  return model;
}

TrustRegionStep tr_step(const GaussNewtonModel& model, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("tr_step: radius must be positive");
  const Eigen::Index n = model.g.size();
  const double trace = model.H.trace();
  const double floor = trace > 0.0 ? 1e-12 * trace / static_cast<double>(n) : std::numeric_limits<double>::min();
  const Mat I = Mat::Identity(n, n);

  TrustRegionStep out;
  const double gnorm = model.g.norm();
  if (gnorm == 0.0) {
    out.s = Vec::Zero(n);
    return out;
  }

  Eigen::LLT<Mat> llt(model.H + floor * I);
  if (llt.info() == Eigen::Success) {
    out.s = -llt.solve(model.g);
    if (out.s.norm() <= delta) return out;
  }

  // ||s(lambda)|| decreases from above delta at the floor to at most
  // ||g|| / lambda, so [floor, ||g|| / delta + floor] brackets the root.
  double lo = floor, hi = gnorm / delta + floor;
  double lambda = lo;
  for (int it = 0; it < 50; ++it) {
    Eigen::LLT<Mat> fact(model.H + lambda * I);
    if (fact.info() != Eigen::Success) {
      lo = lambda;
      lambda = 0.5 * (lo + hi);
      continue;
    }
    const Vec s = -fact.solve(model.g);
    const double snorm = s.norm();
    out.s = s;
    out.lambda = lambda;
    if (std::abs(snorm - delta) <= 1e-6 * delta) return out;
    if (snorm > delta)
      lo = lambda;
    else
      hi = lambda;
    // Newton step on 1/||s|| - 1/delta, with q solving L q = s.
    const Vec q = fact.matrixL().solve(s);
    const double ratio = snorm / q.norm();
    double next = lambda + ratio * ratio * (snorm - delta) / delta;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lambda = next;
  }
  // Out of iterations: take the last bracket end inside the region.
  Eigen::LLT<Mat> fact(model.H + hi * I);
  out.s = -fact.solve(model.g);
  out.lambda = hi;
  return out;
}

Mat jacobian_intervals(const Vec& x, const Mat& L, double sigma_f, int m) {
  const Eigen::Index n = x.size();
  Mat H(m, n);
  if (sigma_f == 0.0) {
    for (Eigen::Index j = 0; j < n; ++j) H.col(j).setConstant(machine_interval(x[j], DifferenceScheme::forward));
    return H;
  }
  if (L.rows() != m || L.cols() != n) throw std::invalid_argument("jacobian_intervals: L must be m x n");
  for (Eigen::Index j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) H(i, j) = noise_optimal_interval(sigma_f, L(i, j), DifferenceScheme::forward);
  return H;
}

SolverResult lm_minimize(NoisyResidualOracle& oracle, const Vec& x0, const LmConfig& config) {
  const int n = oracle.dim();
  const int m = oracle.residual_count();
  if (x0.size() != n) throw std::invalid_argument("lm_minimize: dimension mismatch");
  config.validate(n);
  const double limit = config.budget(n);
  const TrueObjective report = config.report ? config.report : TrueObjective([&oracle](const Vec& x) {
    return residual_objective(oracle.problem(), x);
  });
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SolverResult result;
  Vec x = x0;
  Vec r = oracle.residuals(x);
  double fx = 0.5 * r.squaredNorm();
  double delta = config.delta0;

  const auto gap_reached = [&](double phi) {
    if (!config.gap_stop) return false;
    const auto& gs = *config.gap_stop;
    return phi - gs.phi_star <= gs.tau * std::max(1.0, std::abs(gs.phi_star));
  };
  const auto record = [&](int iteration, double alpha, double grad_norm, double lambda) {
    IterationRecord row;
    row.iteration = iteration;
    row.evals = oracle.eval_units();
    row.noisy_f = fx;
    row.best_noisy_f = fx;  // accepted values only decrease
    row.true_phi = report(x);
    row.alpha = alpha;
    row.grad_norm = grad_norm;
    row.radius = delta;
    row.lambda = lambda;
    result.trace.push_back(row);
    return row.true_phi;
  };
  const auto finish = [&](TerminationReason reason) {
    result.x = x;
    result.noisy_f = fx;
    result.reason = reason;
    result.evals = oracle.eval_units();
    return result;
  };

  if (!std::isfinite(fx)) {
    record(0, nan, nan, nan);
    return finish(TerminationReason::failure);
  }

  Mat L;
  if (config.sigma_f > 0.0) {
    switch (config.lipschitz_policy) {
      case LipschitzPolicy::initial_only:
        L = estimate_residual_lipschitz(oracle, x, config.sigma_f, config.mw, 1.0).values;
        break;
      case LipschitzPolicy::unit:
        L = Mat::Ones(m, n);
        break;
      case LipschitzPolicy::idealized_per_iteration:
        break;  // refreshed below at every iterate
    }
  }

  if (gap_reached(record(0, nan, nan, nan))) return finish(TerminationReason::gap);

  bool need_model = true;
  GaussNewtonModel model;
  for (int k = 1; k <= config.max_iterations; ++k) {
    result.iterations = k;
    if (need_model) {
      if (oracle.eval_units() + n > limit) return finish(TerminationReason::budget);
      if (config.sigma_f > 0.0 && config.lipschitz_policy == LipschitzPolicy::idealized_per_iteration)
        L = floor_curvature(idealized_residual_lipschitz(oracle.problem(), x));
      const FdJacobian jac = fd_jacobian(oracle, x, jacobian_intervals(x, L, config.sigma_f, m), r);
      if (!jac.J.allFinite()) return finish(TerminationReason::failure);
      model = build_model(jac.J, r);
      need_model = false;
    }

    const TrustRegionStep step = tr_step(model, delta);
    const double pred = model.predicted_reduction(step.s);
    const double step_norm = step.s.norm();
    bool accepted = false;

    if (pred > 0.0) {
      if (oracle.eval_units() + 1.0 > limit) return finish(TerminationReason::budget);
      const Vec x_trial = x + step.s;
      const Vec r_trial = oracle.residuals(x_trial);
      const double f_trial = 0.5 * r_trial.squaredNorm();
      const double rho = std::isfinite(f_trial) ? (fx - f_trial) / pred : -1.0;
      if (rho >= config.eta) {
        accepted = true;
        x = x_trial;
        r = r_trial;
        fx = f_trial;
        need_model = true;
      }
      if (rho < 0.25)
        delta *= config.shrink;
      else if (rho > 0.75 && step_norm >= 0.9 * delta)
        delta *= config.expand;
    } else {
      delta *= config.shrink;
    }

    const double phi = record(k, accepted ? 1.0 : 0.0, model.g.norm(), step.lambda);
    if (gap_reached(phi)) return finish(TerminationReason::gap);
    if (delta < config.min_radius) return finish(TerminationReason::radius);
    if (oracle.eval_units() >= limit) return finish(TerminationReason::budget);
  }
  return finish(TerminationReason::budget);
}

}  // namespace fdopt
