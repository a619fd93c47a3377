#pragma once

#include "fdopt/bench.hpp"
#include "fdopt/lbfgs.hpp"
#include "fdopt/leastsq.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdopt {

/// Raised for malformed experiment specs; the message names the field.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Experiment grid read from a flat "key = value" file. List values are
/// comma separated; '#' starts a comment. Keys:
///
///   problems   = ROSENBR, CUBE        (or "all")
///   exclude    = BROWNDEN             (optional manual filter)
///   solvers    = lbfgs-fd, lbfgs-cd, lm-fd
///   sigma_f    = 0, 1e-3
///   seeds      = 1, 2, 3
///   budget     = 500                  (evaluations per variable)
///   lipschitz  = mw_component | scheme:K | fixed:VALUE
///   lm_policy  = initial_only | idealized_per_iteration | unit
///   gap_tau    = 1e-6                 (0 disables the target-gap stop)
///   output     = some/dir             (optional)
struct ExperimentSpec {
  std::vector<std::string> problems;  // resolved names, "all" expanded
  bool all_problems = false;
  std::vector<std::string> exclude;
  std::vector<std::string> solvers;
  std::vector<double> sigma_f;
  std::vector<std::uint64_t> seeds;
  double budget = 500.0;
  LipschitzMode lipschitz_mode = LipschitzMode::mw_component;
  int scheme_k = 5;
  double fixed_value = 1.0;
  LipschitzPolicy lm_policy = LipschitzPolicy::initial_only;
  double gap_tau = 1e-6;
  std::string output;
};

ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

/// One cell of the grid.
struct GridCell {
  std::string solver;
  std::string problem;
  double sigma_f = 0.0;
  std::uint64_t seed = 0;
};

/// Cells in deterministic order: problem, solver, sigma_f, seed. Pairs whose
/// problem lacks the form a solver needs are skipped when the problem list
/// came from "all" and rejected otherwise.
std::vector<GridCell> expand_grid(const ExperimentSpec& spec);

/// Runs one cell and returns its record.
RunRecord run_cell(const ExperimentSpec& spec, const GridCell& cell);

struct GridOutcome {
  std::vector<RunRecord> records;  // grid order; failed cells omitted
  std::vector<std::string> errors;
};

/// Runs every cell on up to `jobs` threads. Records come back in grid order
/// regardless of scheduling.
GridOutcome run_grid(const ExperimentSpec& spec, int jobs = 1);

/// True for solver ids that use the least-squares form.
bool is_least_squares_solver(const std::string& solver_id);

/// Known optimal value for the form a solver works on, if catalogued.
std::optional<double> phi_star_for(const std::string& solver_id, const std::string& problem_id);

}  // namespace fdopt
