#pragma once

#include "fdopt/problem.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fdopt {

enum class TerminationReason { budget, stagnation, gap, radius, failure };

const char* to_string(TerminationReason reason);
std::optional<TerminationReason> termination_reason_from_string(const std::string& text);

/// Noise-free objective used only to annotate run records. Solvers never
/// read it to make decisions; the one exception is the optional target-gap
/// stopping test, which is a benchmarking rule rather than part of a method.
using TrueObjective = std::function<double(const Vec&)>;

struct IterationRecord {
  int iteration = 0;
  double evals = 0.0;  // cumulative evaluation units
  double noisy_f = 0.0;
  double best_noisy_f = 0.0;
  double true_phi = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  bool reestimated = false;
  double radius = std::numeric_limits<double>::quiet_NaN();  // least squares only
  double lambda = std::numeric_limits<double>::quiet_NaN();  // least squares only
};

struct SolverResult {
  Vec x;
  double noisy_f = 0.0;
  TerminationReason reason = TerminationReason::failure;
  double evals = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;
};

/// Stops a run once phi(x_k) - phi* <= tau * max(1, |phi*|).
struct GapStop {
  double phi_star = 0.0;
  double tau = 1e-6;
};

}  // namespace fdopt
