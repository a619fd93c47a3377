#include "fdopt/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fdopt {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t index) const {
  return splitmix64(key_ + index * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform(std::uint64_t index) const {
  // (k + 1/2) / 2^53 for a 53-bit k.
  return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
}

NoiseStream::NoiseStream(NoiseModel model, std::uint64_t stream) : model_(model), rng_(model.seed, stream) {
  if (!(model.sigma_f >= 0.0) || !std::isfinite(model.sigma_f))
    throw std::invalid_argument("noise level must be finite and nonnegative");
}

double NoiseStream::at(std::uint64_t slot) const {
  if (model_.kind == NoiseKind::none) return 0.0;
  static const double kSqrt3 = std::sqrt(3.0);
  return model_.sigma_f * kSqrt3 * (2.0 * rng_.uniform(slot) - 1.0);
}

NoisyOracle::NoisyOracle(SmoothProblem problem, NoiseModel model)
    : problem_(std::move(problem)), noise_(model) {}

double NoisyOracle::value(const Vec& x) { return value_at(x, noise_.reserve(1)); }

double NoisyOracle::value_at(const Vec& x, std::uint64_t slot) {
  const double phi = evaluate(problem_, x);
  evals_.fetch_add(1, std::memory_order_relaxed);
  return phi + noise_.at(slot);
}

NoisyResidualOracle::NoisyResidualOracle(ResidualProblem problem, NoiseModel model)
    : problem_(std::move(problem)), noise_(model) {}

void NoisyResidualOracle::check(const Vec& x, int i) const {
  if (x.size() != problem_.n)
    throw std::invalid_argument(problem_.name + ": expected dimension " + std::to_string(problem_.n));
  if (i < 0 || i >= problem_.m)
    throw std::invalid_argument(problem_.name + ": residual index " + std::to_string(i) + " out of range");
}

double NoisyResidualOracle::residual(const Vec& x, int i) { return residual_at(x, i, noise_.reserve(1)); }

double NoisyResidualOracle::residual_at(const Vec& x, int i, std::uint64_t slot) {
  check(x, i);
  const double gamma = problem_.residual(x, i);
  components_.fetch_add(1, std::memory_order_relaxed);
  return gamma + noise_.at(slot);
}

Vec NoisyResidualOracle::residuals(const Vec& x) {
  const std::uint64_t base = noise_.reserve(static_cast<std::uint64_t>(problem_.m));
  Vec r(problem_.m);
  for (int i = 0; i < problem_.m; ++i) r[i] = residual_at(x, i, base + static_cast<std::uint64_t>(i));
  return r;
}

double NoisyResidualOracle::objective(const Vec& x) { return 0.5 * residuals(x).squaredNorm(); }

double NoisyResidualOracle::eval_units() const {
  return static_cast<double>(component_evals()) / static_cast<double>(problem_.m);
}

std::uint64_t NoisyResidualOracle::eval_count() const {
  const auto m = static_cast<std::uint64_t>(problem_.m);
  return (component_evals() + m - 1) / m;
}

double estimate_noise_level(NoisyOracle& oracle, const Vec& x, int k) {
  if (k < 2) throw std::invalid_argument("estimate_noise_level: need at least 2 samples");
  // Welford update.
  double mean = 0.0, m2 = 0.0;
  for (int j = 0; j < k; ++j) {
    const double f = oracle.value(x);
    const double delta = f - mean;
    mean += delta / (j + 1);
    m2 += delta * (f - mean);
  }
  return std::sqrt(m2 / (k - 1));
}

}  // namespace fdopt
