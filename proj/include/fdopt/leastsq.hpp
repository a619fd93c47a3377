#pragma once

#include "fdopt/fdiff.hpp"
#include "fdopt/lipschitz.hpp"
#include "fdopt/noise.hpp"
#include "fdopt/solver.hpp"

#include <cstdint>
#include <optional>

namespace fdopt {

/// Source of the curvature matrix L_ij behind the Jacobian intervals.
///
/// initial_only: MW per (i, j) at x0, charged to the budget; failed pairs
/// get 1. idealized_per_iteration: noise-free second differences at every
/// iterate, not charged. unit: all ones.
enum class LipschitzPolicy { initial_only, idealized_per_iteration, unit };

const char* to_string(LipschitzPolicy policy);
std::optional<LipschitzPolicy> lipschitz_policy_from_string(const std::string& text);

struct LmConfig {
  double delta0 = 1.0;
  double eta = 1e-4;
  double expand = 2.0;
  double shrink = 0.25;
  double max_evals = 0.0;  // evaluation units; 0 means 500 n
  LipschitzPolicy lipschitz_policy = LipschitzPolicy::initial_only;
  double sigma_f = 0.0;
  double min_radius = 1e-8;
  MWParams mw;
  int max_iterations = 100000;

  std::optional<GapStop> gap_stop;
  TrueObjective report;  // filled from the oracle's problem when empty

  void validate(int n) const;
  double budget(int n) const { return max_evals > 0.0 ? max_evals : 500.0 * n; }
};

/// m(s) = 1/2 ||r||^2 + g^T s + 1/2 s^T H s with g = J^T r, H = J^T J.
struct GaussNewtonModel {
  Vec g;
  Mat H;

  /// m(0) - m(s).
  double predicted_reduction(const Vec& s) const { return -(g.dot(s) + 0.5 * s.dot(H * s)); }
};

GaussNewtonModel build_model(const Mat& J, const Vec& r);

struct TrustRegionStep {
  Vec s;
  double lambda = 0.0;
};

/// Approximate minimizer of the model in the ball ||s|| <= delta: the
/// Gauss-Newton step when it fits, otherwise (H + lambda I) s = -g with
/// ||s|| within relative 1e-6 of delta from a safeguarded Newton iteration on
/// lambda (at most 50 steps). Factorizations use lambda >= 1e-12 trace(H) / n.
TrustRegionStep tr_step(const GaussNewtonModel& model, double delta);

/// Jacobian interval matrix at x: max(1, |x_j|) sqrt(eps) shared by all rows
/// without noise, otherwise 8^(1/4) sqrt(sigma_f / L_ij).
Mat jacobian_intervals(const Vec& x, const Mat& L, double sigma_f, int m);

SolverResult lm_minimize(NoisyResidualOracle& oracle, const Vec& x0, const LmConfig& config);

}  // namespace fdopt
