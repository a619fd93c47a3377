#pragma once

#include "fdopt/problem.hpp"

#include <atomic>
#include <cstdint>

namespace fdopt {

enum class NoiseKind { none, uniform };

/// Additive evaluation noise eps ~ sigma_f * U(-sqrt(3), sqrt(3)), drawn
/// independently of x, so that E[eps] = 0 and E[eps^2] = sigma_f^2.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double sigma_f = 0.0;
  std::uint64_t seed = 0;

  static NoiseModel noiseless() { return {}; }
  static NoiseModel uniform(double sigma_f, std::uint64_t seed) { return {NoiseKind::uniform, sigma_f, seed}; }

  /// sigma_f, or 0 for kind none.
  double level() const { return kind == NoiseKind::none ? 0.0 : sigma_f; }
};

/// Counter-based generator: draw k of a stream is a pure function of
/// (seed, stream, k), computed with the SplitMix64 finalizer. Any draw can be
/// produced independently, which lets concurrent workers use disjoint index
/// ranges and still reproduce the sequential trace.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits(std::uint64_t index) const;
  /// Uniform on (0, 1), symmetric about 1/2.
  double uniform(std::uint64_t index) const;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t z);

/// Stateful noise stream: a model plus an atomic draw cursor.
class NoiseStream {
 public:
  explicit NoiseStream(NoiseModel model, std::uint64_t stream = 0);

  /// Claims the next k draw slots and returns the first.
  std::uint64_t reserve(std::uint64_t k) { return cursor_.fetch_add(k, std::memory_order_relaxed); }
  double at(std::uint64_t slot) const;
  double next() { return at(reserve(1)); }

  const NoiseModel& model() const { return model_; }

 private:
  NoiseModel model_;
  CounterRng rng_;
  std::atomic<std::uint64_t> cursor_{0};
};

/// Zeroth-order access to a smooth problem: f(x) = phi(x) + eps. This is the
/// only path solvers read the objective through; every call is counted.
class NoisyOracle {
 public:
  NoisyOracle(SmoothProblem problem, NoiseModel model);

  NoisyOracle(const NoisyOracle&) = delete;
  NoisyOracle& operator=(const NoisyOracle&) = delete;

  double value(const Vec& x);
  /// Same as value() but draws noise from a previously reserved slot.
  double value_at(const Vec& x, std::uint64_t slot);
  std::uint64_t reserve_draws(std::uint64_t k) { return noise_.reserve(k); }

  std::uint64_t eval_count() const { return evals_.load(std::memory_order_relaxed); }
  double eval_units() const { return static_cast<double>(eval_count()); }
  int dim() const { return problem_.n; }
  double sigma_f() const { return noise_.model().level(); }
  const NoiseModel& model() const { return noise_.model(); }
  const SmoothProblem& problem() const { return problem_; }

 private:
  SmoothProblem problem_;
  NoiseStream noise_;
  std::atomic<std::uint64_t> evals_{0};
};

/// Component-wise access r_i(x) = gamma_i(x) + eps_i for least squares.
/// m component evaluations count as one evaluation unit.
class NoisyResidualOracle {
 public:
  NoisyResidualOracle(ResidualProblem problem, NoiseModel model);

  NoisyResidualOracle(const NoisyResidualOracle&) = delete;
  NoisyResidualOracle& operator=(const NoisyResidualOracle&) = delete;

  /// Zero-based component index i in [0, m).
  double residual(const Vec& x, int i);
  double residual_at(const Vec& x, int i, std::uint64_t slot);
  std::uint64_t reserve_draws(std::uint64_t k) { return noise_.reserve(k); }
  /// All m components at x (one unit).
  Vec residuals(const Vec& x);
  /// 1/2 ||r(x)||^2 from one fresh set of noisy components.
  double objective(const Vec& x);

  std::uint64_t component_evals() const { return components_.load(std::memory_order_relaxed); }
  /// Fractional evaluation units, component_evals / m.
  double eval_units() const;
  /// Units rounded up, for reporting.
  std::uint64_t eval_count() const;

  int dim() const { return problem_.n; }
  int residual_count() const { return problem_.m; }
  double sigma_f() const { return noise_.model().level(); }
  const ResidualProblem& problem() const { return problem_; }

 private:
  void check(const Vec& x, int i) const;

  ResidualProblem problem_;
  NoiseStream noise_;
  std::atomic<std::uint64_t> components_{0};
};

/// Sample standard deviation of k repeated evaluations at x (k >= 2).
double estimate_noise_level(NoisyOracle& oracle, const Vec& x, int k);

}  // namespace fdopt
