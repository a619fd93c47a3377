#include "fdopt/fdiff.hpp"
#include "fdopt/noise.hpp"

#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

using namespace fdopt;

namespace {

SmoothProblem quad(int n) { return make_diagonal_quadratic(Vec::Ones(n), Vec::Ones(n)); }

}  // namespace

TEST_CASE("noiseless oracle returns phi exactly and counts") {
  NoisyOracle oracle(quad(2), NoiseModel::noiseless());
  const Vec x = (Vec(2) << 0.3, -1.7).finished();
  CHECK(oracle.value(x) == evaluate(oracle.problem(), x));
  CHECK(oracle.eval_count() == 1);
  oracle.value(x);
  CHECK(oracle.eval_count() == 2);
  CHECK_THROWS_AS(oracle.value(Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("kind none ignores sigma_f") {
  NoiseModel m = NoiseModel::noiseless();
  m.sigma_f = 5.0;
  NoisyOracle oracle(quad(1), m);
  CHECK(oracle.value(Vec::Zero(1)) == 0.0);
  CHECK(oracle.sigma_f() == 0.0);
}

TEST_CASE("uniform noise stays inside its support") {
  NoisyOracle oracle(quad(1), NoiseModel::uniform(0.1, 9));
  const Vec x = Vec::Constant(1, 0.5);
  const double phi = evaluate(oracle.problem(), x);
  for (int k = 0; k < 100000; ++k) CHECK_LE(std::abs(oracle.value(x) - phi), 0.1 * std::sqrt(3.0));
}

TEST_CASE("same seed and sequence give identical traces") {
  NoisyOracle a(quad(2), NoiseModel::uniform(1e-3, 42));
  NoisyOracle b(quad(2), NoiseModel::uniform(1e-3, 42));
  NoisyOracle c(quad(2), NoiseModel::uniform(1e-3, 43));
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const Vec x = Vec::Constant(2, 0.01 * k);
    const double va = a.value(x);
    CHECK(va == b.value(x));
    differs = differs || va != c.value(x);
  }
  CHECK(differs);
}

TEST_CASE("variance calibration") {
  for (double sigma : {1e-1, 1e-3, 1e-5}) {
    NoiseStream s(NoiseModel::uniform(sigma, 123));
    const int N = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < N; ++k) {
      const double e = s.next();
      sum += e;
      sq += e * e;
    }
    CAPTURE(sigma);
    CHECK(std::abs(sq / N - sigma * sigma) <= 0.01 * sigma * sigma);
    // Mean within five standard errors of zero.
    CHECK(std::abs(sum / N) <= 5.0 * sigma / std::sqrt(double(N)));
  }
}

TEST_CASE("counter rng is a pure function of the index") {
  CounterRng r(7, 3);
  CHECK(r.bits(1000) == CounterRng(7, 3).bits(1000));
  CHECK(r.bits(1000) != CounterRng(7, 4).bits(1000));
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = r.uniform(i);
    CHECK((u > 0.0 && u < 1.0));
  }
  // First output of the reference SplitMix64 generator seeded with 0.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("reserved slots reproduce sequential draws under threads") {
  NoiseStream seq(NoiseModel::uniform(1.0, 5));
  std::vector<double> expected(4000);
  for (auto& v : expected) v = seq.next();

  NoiseStream par(NoiseModel::uniform(1.0, 5));
  const std::uint64_t first = par.reserve(expected.size());
  std::vector<double> got(expected.size());
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t k = t * 1000; k < (t + 1) * 1000u; ++k) got[k] = par.at(first + k);
    });
  for (auto& th : pool) th.join();
  CHECK(got == expected);
}

TEST_CASE("residual oracle: fractional accounting and index checks") {
  const Mat A = Mat::Identity(4, 2);
  const ResidualProblem p = make_affine_residual(A, Vec::Zero(4), Vec::Zero(2));
  NoisyResidualOracle oracle(p, NoiseModel::noiseless());
  const Vec x = (Vec(2) << 1.5, -2.0).finished();
  CHECK(oracle.residual(x, 0) == 1.5);
  CHECK(oracle.residual(x, 1) == -2.0);
  CHECK(oracle.eval_units() == 0.5);
  CHECK(oracle.eval_count() == 1);
  oracle.residual(x, 2);
  oracle.residual(x, 3);
  CHECK(oracle.eval_units() == 1.0);
  CHECK(oracle.component_evals() == 4);
  CHECK_THROWS_AS(oracle.residual(x, 4), std::invalid_argument);
  CHECK_THROWS_AS(oracle.residual(x, -1), std::invalid_argument);
  oracle.residuals(x);
  CHECK(oracle.eval_units() == 2.0);
}

TEST_CASE("residual noise is uncorrelated across components") {
  const ResidualProblem p = make_affine_residual(Mat::Zero(2, 1), Vec::Zero(2), Vec::Zero(1));
  NoisyResidualOracle oracle(p, NoiseModel::uniform(1.0, 77));
  const int N = 100000;
  double s01 = 0.0, s00 = 0.0, s11 = 0.0, m0 = 0.0, m1 = 0.0;
  std::vector<double> e0(N), e1(N);
  for (int k = 0; k < N; ++k) {
    const Vec r = oracle.residuals(Vec::Zero(1));
    e0[k] = r[0];
    e1[k] = r[1];
    m0 += r[0] / N;
    m1 += r[1] / N;
  }
  for (int k = 0; k < N; ++k) {
    s01 += (e0[k] - m0) * (e1[k] - m1);
    s00 += (e0[k] - m0) * (e0[k] - m0);
    s11 += (e1[k] - m1) * (e1[k] - m1);
  }
  const double corr = s01 / std::sqrt(s00 * s11);
  CHECK(std::abs(corr) <= 0.02);
}

TEST_CASE("estimate_noise_level") {
  NoisyOracle quiet(quad(1), NoiseModel::noiseless());
  CHECK(estimate_noise_level(quiet, Vec::Zero(1), 10) == 0.0);
  CHECK(quiet.eval_count() == 10);
  CHECK_THROWS_AS(estimate_noise_level(quiet, Vec::Zero(1), 1), std::invalid_argument);

  NoisyOracle noisy(quad(1), NoiseModel::uniform(1e-3, 8));
  CHECK(std::abs(estimate_noise_level(noisy, Vec::Zero(1), 100000) - 1e-3) <= 0.02e-3);

  // Two samples: |f1 - f2| / sqrt(2), reproduced from a twin oracle.
  NoisyOracle twin_a(quad(1), NoiseModel::uniform(1.0, 21));
  NoisyOracle twin_b(quad(1), NoiseModel::uniform(1.0, 21));
  const double f1 = twin_b.value(Vec::Zero(1)), f2 = twin_b.value(Vec::Zero(1));
  CHECK(estimate_noise_level(twin_a, Vec::Zero(1), 2) == doctest::Approx(std::abs(f1 - f2) / std::sqrt(2.0)));
}

TEST_CASE("gradient evaluation accounting is exact") {
  for (int n : {1, 3, 7}) {
    NoisyOracle oracle(quad(n), NoiseModel::uniform(1e-3, 1));
    const Vec x = Vec::Constant(n, 0.2);
    fd_gradient(oracle, x, DifferenceScheme::forward, IntervalRule::machine());
    CHECK(oracle.eval_count() == std::uint64_t(n + 1));
    fd_gradient(oracle, x, DifferenceScheme::central, IntervalRule::machine());
    CHECK(oracle.eval_count() == std::uint64_t(n + 1 + 2 * n));
  }
}
