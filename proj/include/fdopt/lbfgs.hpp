#pragma once

#include "fdopt/fdiff.hpp"
#include "fdopt/lipschitz.hpp"
#include "fdopt/noise.hpp"
#include "fdopt/solver.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>

namespace fdopt {

enum class LipschitzMode { mw_component, scheme, fixed_value };

const char* to_string(LipschitzMode mode);

struct LbfgsConfig {
  int memory = 10;
  DifferenceScheme scheme = DifferenceScheme::forward;
  double c1 = 1e-4;
  double c2 = 0.9;
  std::uint64_t max_evals = 0;  // 0 means 500 n
  int stagnation_window = 5;
  double sigma_f = 0.0;

  LipschitzMode lipschitz_mode = LipschitzMode::mw_component;
  int scheme_k = 5;          // LipschitzMode::scheme
  double fixed_value = 1.0;  // LipschitzMode::fixed_value
  MWParams mw;

  int max_line_search_iters = 30;
  int max_iterations = 100000;
  int workers = 1;

  /// Benchmark stop on the true gap. Needs `report`.
  std::optional<GapStop> gap_stop;
  /// Reporting channel for true phi; filled from the oracle's problem when
  /// empty.
  TrueObjective report;

  // Test hooks. exact_gradient reads the problem's analytic gradient instead
  // of differencing; exact_step replaces the line search with a supplied step.
  bool exact_gradient = false;
  std::function<double(const Vec& x, const Vec& p)> exact_step;

  void validate(int n) const;
  std::uint64_t budget(int n) const { return max_evals ? max_evals : 500ull * static_cast<std::uint64_t>(n); }
};

/// Correction pairs for the two-loop recursion.
class LbfgsMemory {
 public:
  struct Pair {
    Vec s, y;
    double sy;
  };

  explicit LbfgsMemory(int capacity);

  /// Stores (s, y) unless s^T y <= 1e-12 ||s|| ||y||. Returns whether stored.
  bool push(const Vec& s, const Vec& y);
  void clear() { pairs_.clear(); }
  std::size_t size() const { return pairs_.size(); }
  int capacity() const { return capacity_; }
  const std::deque<Pair>& pairs() const { return pairs_; }

 private:
  int capacity_;
  std::deque<Pair> pairs_;
};

/// p = -H g with H0 = (s^T y / y^T y) I from the newest pair; -g when empty.
/// Throws std::domain_error for non-finite g.
Vec two_loop_direction(const LbfgsMemory& memory, const Vec& g);

/// Sufficient-decrease test with noise slack. When g^T p is below the
/// gradient noise level (gTp >= -sigma_g ||p||) only non-increase is asked;
/// otherwise Armijo, loosened by 2 sigma_f after the first trial.
bool relaxed_armijo_check(int j, double f_trial, double f_k, double alpha, double gTp, double sigma_f,
                          double sigma_g, double p_norm, double c1 = 1e-4);

enum class LineSearchStatus { accepted, relaxed_accepted, nondescent_accepted, failed };

const char* to_string(LineSearchStatus status);

struct LineSearchOutcome {
  double alpha = 0.0;
  std::uint64_t evals = 0;
  LineSearchStatus status = LineSearchStatus::failed;
  double f_trial = 0.0;  // noisy f at x + alpha p when accepted
  int iterations = 0;
  bool budget_hit = false;
};

/// What the line search needs beyond the oracle: the curvature used for the
/// directional interval at a point, and the remaining evaluation budget.
struct LineSearchContext {
  double sigma_f = 0.0;
  double sigma_g = 0.0;
  /// L (forward) or M (central) along p at the given point.
  std::function<double(const Vec& x, const Vec& p)> curvature;
  /// Exact directional derivative; replaces differencing when set.
  std::function<double(const Vec& x, const Vec& p)> exact_directional;
  std::uint64_t eval_limit = UINT64_MAX;
};

/// Bisection Armijo-Wolfe search starting at alpha = 1: contract on a failed
/// decrease test, expand while the curvature test fails with no upper
/// bracket, bisect once bracketed. After the iteration cap the largest step
/// that passed the decrease test is returned, or failure with alpha = 0.
LineSearchOutcome armijo_wolfe_search(NoisyOracle& oracle, const Vec& x, const Vec& p, double f_k, double gTp,
                                      const LbfgsConfig& config, const LineSearchContext& context);

SolverResult minimize(NoisyOracle& oracle, const Vec& x0, const LbfgsConfig& config);

}  // namespace fdopt
