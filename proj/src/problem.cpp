#include "fdopt/problem.hpp"

#include <stdexcept>
#include <string>

namespace fdopt {
namespace {

void check_dim(const std::string& name, int n, const Vec& x) {
  if (x.size() != n)
    throw std::invalid_argument(name + ": expected dimension " + std::to_string(n) + ", got " +
                                std::to_string(x.size()));
}

}  // namespace

double evaluate(const SmoothProblem& problem, const Vec& x) {
  check_dim(problem.name, problem.n, x);
  return problem.value(x);
}

Vec residual_vector(const ResidualProblem& problem, const Vec& x) {
  check_dim(problem.name, problem.n, x);
  Vec r(problem.m);
  for (int i = 0; i < problem.m; ++i) r[i] = problem.residual(x, i);
  return r;
}

double residual_objective(const ResidualProblem& problem, const Vec& x) {
  return 0.5 * residual_vector(problem, x).squaredNorm();
}

}  // namespace fdopt
