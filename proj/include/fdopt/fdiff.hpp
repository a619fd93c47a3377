#pragma once

#include "fdopt/noise.hpp"
#include "fdopt/problem.hpp"

#include <cstdint>
#include <optional>

namespace fdopt {

/// Unit roundoff of binary64 as used in the interval formulas, 2^-52.
inline constexpr double kMachineEps = 0x1.0p-52;

enum class DifferenceScheme { forward, central };

const char* to_string(DifferenceScheme scheme);

/// How differencing intervals are chosen.
///
/// machine_eps: h_i = max(1, |x_i|) * sqrt(eps) (forward) or * cbrt(eps)
/// (central). noise_optimal: h_i = 8^(1/4) * sqrt(sigma_f / L_i) (forward) or
/// (3 sigma_f / M_i)^(1/3) (central), with no max(1, |x_i|) scaling.
struct IntervalRule {
  enum class Kind { machine_eps, noise_optimal };

  Kind kind = Kind::machine_eps;
  double sigma_f = 0.0;
  Vec curvature;  // L_i (forward) or M_i (central); noise_optimal only

  static IntervalRule machine() { return {}; }
  static IntervalRule noise_optimal(double sigma_f, Vec curvature) {
    return {Kind::noise_optimal, sigma_f, std::move(curvature)};
  }
};

double machine_interval(double x_i, DifferenceScheme scheme);

/// Minimizer of mse_bound over h. Throws if curvature <= 0.
double noise_optimal_interval(double sigma_f, double curvature, DifferenceScheme scheme);

/// Interval for coordinate `coord` at x_i under `rule`.
double interval(double x_i, const IntervalRule& rule, DifferenceScheme scheme, int coord);

struct FdGradient {
  Vec g;
  std::uint64_t evals = 0;
};

/// Coordinate finite-difference gradient.
///
/// Forward uses n + 1 evaluations with f(x) shared by all coordinates (n when
/// `fx` is supplied); central uses 2n. Perturbed evaluations draw noise from
/// slots reserved up front, so with `workers > 1` the coordinates are split
/// into static contiguous blocks and the result is bit-identical to the
/// sequential one.
FdGradient fd_gradient(NoisyOracle& oracle, const Vec& x, DifferenceScheme scheme, const IntervalRule& rule,
                       std::optional<double> fx = std::nullopt, int workers = 1);

/// Derivative along p: ((f(x + h p_u) - f(x)) / h) ||p|| (forward) or the
/// symmetric quotient (central), with p_u = p / ||p||.
double fd_directional(NoisyOracle& oracle, const Vec& x, const Vec& p, DifferenceScheme scheme, double h,
                      std::optional<double> fx = std::nullopt);

struct FdJacobian {
  Mat J;       // m x n
  Vec r;       // base residuals r(x)
  std::uint64_t component_evals = 0;
  double units() const { return static_cast<double>(component_evals) / static_cast<double>(r.size()); }
};

/// Forward-difference Jacobian J_ij = (r_i(x + H_ij e_j) - r_i(x)) / H_ij.
/// Each base component is evaluated once (skipped when `base` is supplied).
FdJacobian fd_jacobian(NoisyResidualOracle& oracle, const Vec& x, const Mat& H,
                       std::optional<Vec> base = std::nullopt);

/// Upper bound on the mean-squared derivative error at interval h:
/// L^2 h^2 / 4 + 2 sigma^2 / h^2 (forward), M^2 h^4 / 36 + sigma^2 / (2 h^2)
/// (central).
double mse_bound(double h, double curvature, double sigma_f, DifferenceScheme scheme);

/// Derivative noise level at the optimal interval: 2^(1/4) sqrt(L sigma)
/// (forward), 3^(1/6) / 2 * M^(1/3) sigma^(2/3) (central).
double gradient_noise_level(double sigma_f, double curvature, DifferenceScheme scheme);

/// sqrt(sum_i s_i^2).
double full_gradient_noise_level(const Vec& per_coordinate);

}  // namespace fdopt
