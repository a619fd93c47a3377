#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fdopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Unconstrained smooth objective phi(x) with optional reference derivatives.
///
/// Instances are immutable once built and safe to evaluate concurrently.
struct SmoothProblem {
  std::string name;
  int n = 0;
  Vec x0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // empty when not available
  /// p^T * Hessian(x) * p. Full Hessians are never formed.
  std::function<double(const Vec&, const Vec&)> hessian_quadform;
  std::optional<double> phi_star;
  std::string provenance;

  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_hessian() const { return static_cast<bool>(hessian_quadform); }
};

/// Nonlinear least-squares problem 1/2 * sum_i gamma_i(x)^2.
///
/// Components are evaluable one at a time; evaluating gamma_i never touches
/// gamma_j for j != i. Component indices are zero-based.
struct ResidualProblem {
  std::string name;
  int n = 0;
  int m = 0;
  Vec x0;
  std::function<double(const Vec&, int)> residual;
  std::function<Mat(const Vec&)> jacobian;  // m x n, empty when not available
  std::optional<double> phi_star;
  std::string provenance;

  bool has_jacobian() const { return static_cast<bool>(jacobian); }
};

/// phi(x) without noise. Throws std::invalid_argument on dimension mismatch.
double evaluate(const SmoothProblem& problem, const Vec& x);

/// gamma(x) as an m-vector, noise free.
Vec residual_vector(const ResidualProblem& problem, const Vec& x);

/// 1/2 * ||gamma(x)||^2, noise free.
double residual_objective(const ResidualProblem& problem, const Vec& x);

struct CatalogEntry {
  std::optional<SmoothProblem> smooth;
  std::optional<ResidualProblem> residual;
  std::string name;
  std::optional<Vec> known_minimizer;
};

/// Built-in test problems. Smooth forms follow the sum-of-squares convention
/// (no 1/2 factor); least-squares forms carry the 1/2 factor.
const std::vector<CatalogEntry>& catalog();

/// nullptr when the name is unknown.
const CatalogEntry* find_entry(const std::string& name);
std::optional<SmoothProblem> find_smooth(const std::string& name);
std::optional<ResidualProblem> find_residual(const std::string& name);

/// Names of the fifteen smooth problems used by the coverage suites.
const std::vector<std::string>& core_smooth_names();
/// Names of the eight least-squares problems used by the coverage suites.
const std::vector<std::string>& core_residual_names();

/// phi(x) = 1/2 * sum_i a_i x_i^2, with analytic derivatives.
SmoothProblem make_diagonal_quadratic(const Vec& diag, const Vec& x0, std::string name = "DIAGQUAD");

/// r(x) = A x - b.
ResidualProblem make_affine_residual(const Mat& A, const Vec& b, const Vec& x0, std::string name = "AFFINE");

}  // namespace fdopt
