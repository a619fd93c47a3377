#pragma once

#include "fdopt/noise.hpp"
#include "fdopt/problem.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fdopt {

/// Lower bound applied to every curvature estimate.
inline constexpr double kCurvatureFloor = 0.1;

/// Parameters of the More-Wild second-difference search.
///
/// The probe width starts at t0 (sigma^(1/4) * max(1, |x^T p|), or eps^(1/4)
/// without noise) and moves along a geometric ladder: up when the second
/// difference is buried in noise, down when the probes change f by too large a
/// relative amount. Once a too-small and a too-large width are both known the
/// search bisects between them geometrically. A probe failing both tests ends
/// the search. max_iters bounds the total number of probes.
struct MWParams {
  double tau1 = 100.0;
  double tau2 = 0.1;
  double growth = 10.0;
  int max_iters = 11;
};

enum class CurvatureOrder { second, third };

struct LipschitzEstimate {
  Vec values;
  CurvatureOrder order = CurvatureOrder::second;
  std::string method;
  std::uint64_t evals_spent = 0;
  std::vector<bool> floor_applied;
};

/// Scalar function sampled by the estimators; each call is one evaluation.
using SampleFn = std::function<double(const Vec&)>;

/// f(x + t p) - 2 f(x) + f(x - t p). Uses `fx` for f(x) when given.
double second_difference(NoisyOracle& oracle, const Vec& x, const Vec& p, double t,
                         std::optional<double> fx = std::nullopt);

struct MWProbe {
  double t = 0.0;
  double f0 = 0.0;
  double f_plus = 0.0;
  double f_minus = 0.0;
  double delta() const { return f_plus - 2.0 * f0 + f_minus; }
};

struct MWResult {
  bool success = false;
  double estimate = 0.0;  // max(0.1, |delta| / t^2) on success
  double noise_scale = 0.0;  // eps_f used in the first condition
  std::vector<MWProbe> probes;
  std::uint64_t evals = 0;
};

/// Second condition alone: both probes change f by at most tau2 relative.
bool relative_change_ok(const MWProbe& probe, const MWParams& params);

/// True when a probe meets both acceptance conditions.
bool mw_conditions_hold(const MWProbe& probe, double noise_scale, const MWParams& params);

/// More-Wild search along unit direction p. Failure is reported in the
/// result, not thrown.
MWResult mw_estimate(const SampleFn& f, const Vec& x, const Vec& p, double sigma_f, const MWParams& params,
                     std::optional<double> fx = std::nullopt);
MWResult mw_estimate(NoisyOracle& oracle, const Vec& x, const Vec& p, double sigma_f, const MWParams& params,
                     std::optional<double> fx = std::nullopt);

/// MW along every coordinate; failures take the floor 0.1.
LipschitzEstimate estimate_component_lipschitz(NoisyOracle& oracle, const Vec& x, double sigma_f,
                                               const MWParams& params, std::optional<double> fx = std::nullopt);

/// ||values||_2 / sqrt(n).
double directional_curvature(const LipschitzEstimate& estimate);

/// Curvature state owned by a solver loop: re-estimate whenever the last
/// accepted step was shorter than the threshold.
struct AdaptiveState {
  LipschitzEstimate current;
  double last_alpha = 1.0;
  double reestimate_threshold = 0.5;
};

/// Returns the state unchanged when last_alpha >= threshold; otherwise a state
/// whose estimate was recomputed at x_k (evaluations accumulate in
/// evals_spent).
AdaptiveState adaptive_maybe_reestimate(const AdaptiveState& state, NoisyOracle& oracle, const Vec& x_k,
                                        double sigma_f, const MWParams& params,
                                        std::optional<double> fx = std::nullopt);

/// Hessian-based estimators (schemes 1-9). Schemes k and k + 4 share a
/// formula for k = 2..5; the solver decides whether a scheme is frozen at x0
/// (1-5) or re-evaluated at each differencing point (6-9).
///
///   1: L = 1
///   2, 6: max(0.1, ||H||_2)
///   3, 7: max(0.1, mean |H_ii|)
///   4, 8: max(0.1, rms H_ii)
///   5, 9: componentwise max(0.1, |H_ii|)
///
/// Throws std::invalid_argument for scheme outside 1..9 and
/// std::logic_error when a Hessian-based scheme lacks the Hessian hook.
LipschitzEstimate estimate_scheme(int scheme, const SmoothProblem& problem, const Vec& x);

/// True for schemes evaluated at each differencing point.
bool scheme_is_pointwise(int scheme);

/// Directional L used for line-search differencing: ||L||/sqrt(n) for the
/// componentwise schemes, the scalar otherwise; scheme 9 uses
/// max(0.1, |p^T H(x) p| / ||p||^2) at the differencing point.
double scheme_directional(int scheme, const SmoothProblem& problem, const LipschitzEstimate& estimate,
                          const Vec& x, const Vec& p);

/// ||H(x)||_2 by 30 power iterations on matrix-vector products recovered from
/// the quadratic-form hook.
double hessian_spectral_norm(const SmoothProblem& problem, const Vec& x, int iterations = 30);

/// Diagonal e_i^T H(x) e_i.
Vec hessian_diagonal(const SmoothProblem& problem, const Vec& x);

/// Third-derivative bound from the change in curvature along p over
/// sqrt(eps), floored at 0.1. Not charged to any evaluation budget.
double third_derivative_estimate(const SmoothProblem& problem, const Vec& x, const Vec& p);

/// third_derivative_estimate along each coordinate.
LipschitzEstimate third_derivative_components(const SmoothProblem& problem, const Vec& x);

/// |gamma_i(x + h e_j) + gamma_i(x - h e_j) - 2 gamma_i(x)| / h^2 with
/// h = eps^(1/4), from noise-free residuals. No floor applied.
Mat idealized_residual_lipschitz(const ResidualProblem& problem, const Vec& x);

/// Entrywise max(floor, L_ij).
Mat floor_curvature(const Mat& L, double floor = kCurvatureFloor);

struct ResidualLipschitz {
  Mat values;  // m x n
  std::uint64_t component_evals = 0;
  int failures = 0;
};

/// MW estimate for every (residual i, coordinate j) pair through the noisy
/// component oracle. Failed pairs are set to `failure_value`.
ResidualLipschitz estimate_residual_lipschitz(NoisyResidualOracle& oracle, const Vec& x, double sigma_f,
                                              const MWParams& params, double failure_value = 1.0);

}  // namespace fdopt
