#include "fdopt/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdopt {

const char* to_string(LipschitzMode mode) {
  switch (mode) {
    case LipschitzMode::mw_component:
      return "mw_component";
    case LipschitzMode::scheme:
      return "scheme";
    default:
      return "fixed_value";
  }
}

const char* to_string(LineSearchStatus status) {
  switch (status) {
    case LineSearchStatus::accepted:
      return "accepted";
    case LineSearchStatus::relaxed_accepted:
      return "relaxed_accepted";
    case LineSearchStatus::nondescent_accepted:
      return "nondescent_accepted";
    default:
      return "failed";
  }
}

void LbfgsConfig::validate(int n) const {
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("lbfgs: need 0 < c1 < c2 < 1");
  if (memory < 1) throw std::invalid_argument("lbfgs: memory must be at least 1");
  if (stagnation_window < 1) throw std::invalid_argument("lbfgs: stagnation window must be positive");
  if (!(sigma_f >= 0.0)) throw std::invalid_argument("lbfgs: negative noise level");
  if (budget(n) < static_cast<std::uint64_t>(n) + 2) throw std::invalid_argument("lbfgs: budget below n + 2");
  if (lipschitz_mode == LipschitzMode::scheme && (scheme_k < 1 || scheme_k > 9))
    throw std::invalid_argument("lbfgs: scheme must be in 1..9");
  if (lipschitz_mode == LipschitzMode::fixed_value && !(fixed_value > 0.0))
    throw std::invalid_argument("lbfgs: fixed curvature must be positive");
  if (max_line_search_iters < 1) throw std::invalid_argument("lbfgs: line search needs at least one iteration");
}

LbfgsMemory::LbfgsMemory(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("LbfgsMemory: capacity must be positive");
}

bool LbfgsMemory::push(const Vec& s, const Vec& y) {
  const double sy = s.dot(y);
  if (!(sy > 1e-12 * s.norm() * y.norm())) return false;
  if (static_cast<int>(pairs_.size()) == capacity_) pairs_.pop_front();
  pairs_.push_back({s, y, sy});
  return true;
}

Vec two_loop_direction(const LbfgsMemory& memory, const Vec& g) {
  if (!g.allFinite()) throw std::domain_error("two_loop_direction: non-finite gradient");
  Vec q = g;
  const auto& pairs = memory.pairs();
  std::vector<double> a(pairs.size());
  for (std::size_t k = pairs.size(); k-- > 0;) {
    a[k] = pairs[k].s.dot(q) / pairs[k].sy;
    q -= a[k] * pairs[k].y;
  }
  if (!pairs.empty()) q *= pairs.back().sy / pairs.back().y.squaredNorm();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double b = pairs[k].y.dot(q) / pairs[k].sy;
    q += (a[k] - b) * pairs[k].s;
  }
  return -q;
}

bool relaxed_armijo_check(int j, double f_trial, double f_k, double alpha, double gTp, double sigma_f,
                          double sigma_g, double p_norm, double c1) {
  if (gTp >= -sigma_g * p_norm) return f_trial <= f_k;
  const double slack = j == 0 ? 0.0 : 2.0 * sigma_f;
  return f_trial <= f_k + c1 * alpha * gTp + slack;
}

LineSearchOutcome armijo_wolfe_search(NoisyOracle& oracle, const Vec& x, const Vec& p, double f_k, double gTp,
                                      const LbfgsConfig& config, const LineSearchContext& context) {
  const double p_norm = p.norm();
  if (!(p_norm > 0.0)) throw std::invalid_argument("armijo_wolfe_search: zero direction");
  const std::uint64_t before = oracle.eval_count();
  const bool forward = config.scheme == DifferenceScheme::forward;
  const bool trusted_descent = gTp < -context.sigma_g * p_norm;
  const Vec pu = p / p_norm;

  const auto directional = [&](const Vec& xt, double ft) {
    if (context.exact_directional) return context.exact_directional(xt, p);
    double h;
    if (context.sigma_f > 0.0) {
      h = noise_optimal_interval(context.sigma_f, context.curvature(xt, p), config.scheme);
    } else {
      h = machine_interval(xt.dot(pu), config.scheme);
    }
    // Forward quotients reuse f(x + alpha p) from the decrease test.
    return fd_directional(oracle, xt, p, config.scheme, h, forward ? std::optional<double>(ft) : std::nullopt);
  };
  const std::uint64_t directional_cost = context.exact_directional ? 0 : (forward ? 1 : 2);

  LineSearchOutcome out;
  double alpha = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  double f_lo = f_k;
  LineSearchStatus status_lo = LineSearchStatus::failed;

  for (int j = 0; j < config.max_line_search_iters; ++j) {
    out.iterations = j + 1;
    if (oracle.eval_count() + 1 > context.eval_limit) {
      out.budget_hit = true;
      break;
    }
    const Vec xt = x + alpha * p;
    const double ft = oracle.value(xt);
    const bool decrease = std::isfinite(ft) && relaxed_armijo_check(j, ft, f_k, alpha, gTp, context.sigma_f,
                                                                      context.sigma_g, p_norm, config.c1);
    if (!decrease) {
      hi = alpha;
      alpha = 0.5 * (lo + hi);
      continue;
    }
    LineSearchStatus status = LineSearchStatus::accepted;
    if (!trusted_descent)
      status = LineSearchStatus::nondescent_accepted;
    else if (j > 0 && context.sigma_f > 0.0)
      status = LineSearchStatus::relaxed_accepted;

    if (oracle.eval_count() + directional_cost > context.eval_limit) {
      // No budget left to test curvature; keep the step that decreased f.
      out.budget_hit = true;
      lo = alpha;
      f_lo = ft;
      status_lo = status;
      break;
    }
    if (directional(xt, ft) >= config.c2 * gTp) {
      out.alpha = alpha;
      out.f_trial = ft;
      out.status = status;
      out.evals = oracle.eval_count() - before;
      return out;
    }
    lo = alpha;
    f_lo = ft;
    status_lo = status;
    alpha = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * alpha;
  }

  if (lo > 0.0) {
    out.alpha = lo;
    out.f_trial = f_lo;
    out.status = status_lo;
  } else {
    out.alpha = 0.0;
    out.f_trial = f_k;
    out.status = LineSearchStatus::failed;
  }
  out.evals = oracle.eval_count() - before;
  return out;
}

namespace {

// Curvature source for differencing intervals, according to the configured
// mode. Forward differencing needs L; central differencing needs M, which is
// read from the Hessian hook at the differencing point (free of charge) when
// available and otherwise taken equal to L.
class CurvatureModel {
 public:
  CurvatureModel(NoisyOracle& oracle, const LbfgsConfig& config) : oracle_(oracle), config_(config) {}

  bool noisy() const { return config_.sigma_f > 0.0; }

  // Initial estimate at x0. Returns false if the budget cannot cover it.
  void initialize(const Vec& x0, double f0, std::uint64_t limit) {
    const int n = oracle_.dim();
    switch (config_.lipschitz_mode) {
      case LipschitzMode::mw_component:
        if (noisy() && affordable(limit)) {
          state_.current = estimate_component_lipschitz(oracle_, x0, config_.sigma_f, config_.mw, f0);
        } else {
          state_.current.values = Vec::Constant(n, kCurvatureFloor);
          state_.current.method = "mw_component";
        }
        break;
      case LipschitzMode::scheme:
        state_.current = estimate_scheme(config_.scheme_k, oracle_.problem(), x0);
        break;
      case LipschitzMode::fixed_value:
        state_.current.values = Vec::Constant(n, config_.fixed_value);
        state_.current.method = "fixed_value";
        break;
    }
  }

  // Adaptive re-estimation after a short step. Returns whether a new estimate was computed.
  bool maybe_reestimate(const Vec& x, double fx, double last_alpha, std::uint64_t limit) {
    if (config_.lipschitz_mode != LipschitzMode::mw_component || !noisy()) return false;
    state_.last_alpha = last_alpha;
    if (!(last_alpha < state_.reestimate_threshold) || !affordable(limit)) return false;
    state_ = adaptive_maybe_reestimate(state_, oracle_, x, config_.sigma_f, config_.mw, fx);
    return true;
  }

  // Per-coordinate curvature for the gradient at x.
  Vec coordinates(const Vec& x) const {
    if (config_.scheme == DifferenceScheme::central) {
      if (oracle_.problem().has_hessian()) return third_derivative_components(oracle_.problem(), x).values;
      return second_order(x);
    }
    return second_order(x);
  }

  // Curvature along p at x, for the line-search interval.
  double along(const Vec& x, const Vec& p) const {
    if (config_.scheme == DifferenceScheme::central && oracle_.problem().has_hessian())
      return third_derivative_estimate(oracle_.problem(), x, p);
    if (config_.lipschitz_mode == LipschitzMode::scheme) {
      const auto est = scheme_is_pointwise(config_.scheme_k) ? estimate_scheme(config_.scheme_k, oracle_.problem(), x)
                                                             : state_.current;
      return scheme_directional(config_.scheme_k, oracle_.problem(), est, x, p);
    }
    return directional_curvature(state_.current);
  }

 private:
  Vec second_order(const Vec& x) const {
    if (config_.lipschitz_mode == LipschitzMode::scheme && scheme_is_pointwise(config_.scheme_k))
      return estimate_scheme(config_.scheme_k, oracle_.problem(), x).values;
    return state_.current.values;
  }

  // Worst-case MW cost with f(x) reused: two probes per ladder step.
  bool affordable(std::uint64_t limit) const {
    const auto worst = static_cast<std::uint64_t>(oracle_.dim()) * 2u * static_cast<std::uint64_t>(config_.mw.max_iters);
    return oracle_.eval_count() + worst <= limit;
  }

  NoisyOracle& oracle_;
  const LbfgsConfig& config_;
  AdaptiveState state_;
};

double stagnation_threshold(double sigma_f, double f) {
  return sigma_f > 0.0 ? 10.0 * sigma_f : 1e-16 * std::max(1.0, std::abs(f));
}

}  // namespace

SolverResult minimize(NoisyOracle& oracle, const Vec& x0, const LbfgsConfig& config) {
  const int n = oracle.dim();
  if (x0.size() != n) throw std::invalid_argument("minimize: dimension mismatch");
  config.validate(n);
  if (config.exact_gradient && !oracle.problem().has_gradient())
    throw std::logic_error("minimize: exact-gradient mode needs an analytic gradient");

  const std::uint64_t limit = config.budget(n);
  const TrueObjective report =
      config.report ? config.report : TrueObjective([&oracle](const Vec& x) { return evaluate(oracle.problem(), x); });
  const bool forward = config.scheme == DifferenceScheme::forward;

  SolverResult result;
  result.x = x0;
  Vec x = x0;
  double fx = oracle.value(x);
  double best = fx;
  result.noisy_f = fx;

  const auto gap_reached = [&](double phi) {
    if (!config.gap_stop) return false;
    const auto& gs = *config.gap_stop;
    return phi - gs.phi_star <= gs.tau * std::max(1.0, std::abs(gs.phi_star));
  };
  const auto record = [&](int iteration, double alpha, double grad_norm, bool reestimated) {
    IterationRecord row;
    row.iteration = iteration;
    row.evals = oracle.eval_units();
    row.noisy_f = fx;
    row.best_noisy_f = best;
    row.true_phi = report(x);
    row.alpha = alpha;
    row.grad_norm = grad_norm;
    row.reestimated = reestimated;
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
    record(0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), false);
    return finish(TerminationReason::failure);
  }

  CurvatureModel curvature(oracle, config);
  curvature.initialize(x, fx, limit);
  if (gap_reached(record(0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), false)))
    return finish(TerminationReason::gap);

  LbfgsMemory memory(config.memory);
  Vec x_prev, g_prev;
  double last_alpha = 1.0;
  int stalled = 0;
  const std::uint64_t gradient_cost = config.exact_gradient ? 0 : static_cast<std::uint64_t>(forward ? n : 2 * n);

  for (int k = 1; k <= config.max_iterations; ++k) {
    result.iterations = k;
    const bool reestimated = curvature.maybe_reestimate(x, fx, last_alpha, limit);

    if (oracle.eval_count() + gradient_cost > limit) return finish(TerminationReason::budget);
    Vec g;
    Vec coord_curv;
    if (config.exact_gradient) {
      g = oracle.problem().gradient(x);
    } else {
      const IntervalRule rule = curvature.noisy()
                                    ? IntervalRule::noise_optimal(config.sigma_f, coord_curv = curvature.coordinates(x))
                                    : IntervalRule::machine();
      g = fd_gradient(oracle, x, config.scheme, rule, forward ? std::optional<double>(fx) : std::nullopt,
                      config.workers)
              .g;
    }
    if (!g.allFinite()) return finish(TerminationReason::failure);

    double sigma_g = 0.0;
    if (curvature.noisy() && !config.exact_gradient) {
      Vec levels(n);
      for (int i = 0; i < n; ++i) levels[i] = gradient_noise_level(config.sigma_f, coord_curv[i], config.scheme);
      sigma_g = full_gradient_noise_level(levels);
    }

    if (g_prev.size() == n) memory.push(x - x_prev, g - g_prev);

    Vec p = two_loop_direction(memory, g);
    double gTp = g.dot(p);
    if (!(gTp < 0.0)) {
      memory.clear();
      p = -g;
      gTp = -g.squaredNorm();
    }
    if (!(p.norm() > 0.0)) {
      // Exactly zero gradient: nothing left to do.
      record(k, 0.0, 0.0, reestimated);
      return finish(TerminationReason::stagnation);
    }

    LineSearchOutcome ls;
    if (config.exact_step) {
      ls.alpha = config.exact_step(x, p);
      if (oracle.eval_count() + 1 > limit) return finish(TerminationReason::budget);
      ls.f_trial = oracle.value(x + ls.alpha * p);
      ls.status = ls.alpha > 0.0 ? LineSearchStatus::accepted : LineSearchStatus::failed;
    } else {
      LineSearchContext ctx;
      ctx.sigma_f = config.sigma_f;
      ctx.sigma_g = sigma_g;
      ctx.curvature = [&curvature](const Vec& y, const Vec& d) { return curvature.along(y, d); };
      if (config.exact_gradient)
        ctx.exact_directional = [&oracle](const Vec& y, const Vec& d) { return oracle.problem().gradient(y).dot(d); };
      ctx.eval_limit = limit;
      ls = armijo_wolfe_search(oracle, x, p, fx, gTp, config, ctx);
    }

    x_prev = x;
    g_prev = g;
    if (ls.status == LineSearchStatus::failed) {
      // Treated as a zero step: the adaptive rule re-estimates on the next pass and
      // the memory restarts from steepest descent.
      last_alpha = 0.0;
      memory.clear();
      g_prev.resize(0);
    } else {
      last_alpha = ls.alpha;
      x = x + ls.alpha * p;
      fx = ls.f_trial;
    }

    const double previous_best = best;
    best = std::min(best, fx);
    if (previous_best - best > stagnation_threshold(config.sigma_f, previous_best))
      stalled = 0;
    else
      ++stalled;

    const double phi = record(k, ls.alpha, g.norm(), reestimated);
    if (gap_reached(phi)) return finish(TerminationReason::gap);
    if (ls.budget_hit || oracle.eval_count() >= limit) return finish(TerminationReason::budget);
    if (stalled >= config.stagnation_window) return finish(TerminationReason::stagnation);
  }
  return finish(TerminationReason::budget);
}

}  // namespace fdopt
