#include "fdopt/experiment.hpp"

#include <doctest.h>

using namespace fdopt;

namespace {

std::string spec_error(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_spec: full example") {
  const ExperimentSpec s = parse_spec(
      "# grid\n"
      "problems = ROSENBR, CUBE   # two problems\n"
      "solvers = lbfgs-fd, lbfgs-cd\n"
      "sigma_f = 0, 1e-3\n"
      "seeds = 1, 2, 3\n"
      "budget = 50\n"
      "lipschitz = scheme:7\n"
      "lm_policy = unit\n"
      "gap_tau = 0\n"
      "output = somewhere\n");
  CHECK(s.problems == std::vector<std::string>{"ROSENBR", "CUBE"});
  CHECK(s.solvers == std::vector<std::string>{"lbfgs-fd", "lbfgs-cd"});
  CHECK(s.sigma_f == std::vector<double>{0.0, 1e-3});
  CHECK(s.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(s.budget == 50.0);
  CHECK(s.lipschitz_mode == LipschitzMode::scheme);
  CHECK(s.scheme_k == 7);
  CHECK(s.lm_policy == LipschitzPolicy::unit);
  CHECK(s.gap_tau == 0.0);
  CHECK(s.output == "somewhere");

  const ExperimentSpec d = parse_spec("problems = HELIX\nsolvers = lm-fd\n");
  CHECK(d.sigma_f == std::vector<double>{0.0});
  CHECK(d.seeds == std::vector<std::uint64_t>{0});
  CHECK(d.budget == 500.0);
  CHECK(d.lipschitz_mode == LipschitzMode::mw_component);
  CHECK(parse_spec("problems = HELIX\nsolvers = lbfgs-fd\nlipschitz = fixed:2.5\n").fixed_value == 2.5);
}

TEST_CASE("parse_spec: errors name the field") {
  CHECK(spec_error("solvers = lbfgs-fd\n").find("'problems'") != std::string::npos);
  CHECK(spec_error("problems = NOPE\nsolvers = lbfgs-fd\n").find("NOPE") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = newuoa\n").find("'solvers'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\nsigma_f = x\n").find("'sigma_f'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\nsigma_f = -1\n").find("'sigma_f'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\nseeds = 1.5\n").find("'seeds'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\nbudget = 0.5\n").find("'budget'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\nlipschitz = scheme:12\n").find("'lipschitz'") !=
        std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\nlm_policy = often\n").find("'lm_policy'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\ncolour = red\n").find("'colour'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nproblems = BARD\nsolvers = lm-fd\n").find("'problems'") != std::string::npos);
  CHECK(spec_error("problems = HELIX\nsolvers = lm-fd\nexclude = ZZZ\n").find("ZZZ") != std::string::npos);
  CHECK(spec_error("problems HELIX\n").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.txt"), SpecError);
}

TEST_CASE("expand_grid: order, exclusions and solver forms") {
  const ExperimentSpec s = parse_spec(
      "problems = HELIX, BARD, ROSENBR\nexclude = BARD\nsolvers = lm-fd, lbfgs-fd\nsigma_f = 0, 1e-2\nseeds = 4, 5\n");
  const auto cells = expand_grid(s);
  REQUIRE(cells.size() == 2 * 2 * 2 * 2);
  CHECK(cells[0].problem == "HELIX");
  CHECK(cells[0].solver == "lm-fd");
  CHECK(cells[0].sigma_f == 0.0);
  CHECK(cells[0].seed == 4);
  CHECK(cells[1].seed == 5);
  CHECK(cells[2].sigma_f == 1e-2);
  CHECK(cells[4].solver == "lbfgs-fd");
  CHECK(cells[8].problem == "ROSENBR");

  // BROWNDEN has only a least-squares form.
  CHECK_THROWS_AS(expand_grid(parse_spec("problems = BROWNDEN\nsolvers = lbfgs-fd\n")), SpecError);
  const auto all = expand_grid(parse_spec("problems = all\nsolvers = lbfgs-fd\n"));
  for (const auto& c : all) CHECK(find_entry(c.problem)->smooth.has_value());
  CHECK(all.size() == 16);
}

TEST_CASE("run_grid: deterministic across thread counts") {
  const ExperimentSpec s = parse_spec(
      "problems = ROSENBR, HELIX\nsolvers = lbfgs-fd, lbfgs-cd, lm-fd\nsigma_f = 0, 1e-3\nseeds = 3\nbudget = 40\n");
  const GridOutcome one = run_grid(s, 1);
  const GridOutcome many = run_grid(s, 5);
  CHECK(one.errors.empty());
  CHECK(one.records.size() == expand_grid(s).size());
  CHECK(runs_csv(one.records) == runs_csv(many.records));
}

TEST_CASE("run_cell: gap stop and budget") {
  const ExperimentSpec s = parse_spec("problems = ROSENBR\nsolvers = lm-fd\nbudget = 500\n");
  const RunRecord r = run_cell(s, {"lm-fd", "ROSENBR", 0.0, 0});
  CHECK(r.reason == TerminationReason::gap);
  CHECK(gap_target(r.trace.back().true_phi, 0.0, 1e-6));
  CHECK(r.trace.back().evals <= 1000.0);

  const ExperimentSpec no_gap = parse_spec("problems = ROSENBR\nsolvers = lbfgs-fd\nbudget = 30\ngap_tau = 0\n");
  const RunRecord q = run_cell(no_gap, {"lbfgs-fd", "ROSENBR", 1e-3, 2});
  CHECK(q.reason != TerminationReason::gap);
  CHECK(q.trace.back().evals <= 60.0);

  CHECK(phi_star_for("lm-fd", "BARD") == find_residual("BARD")->phi_star);
  CHECK(phi_star_for("lbfgs-fd", "BARD") == find_smooth("BARD")->phi_star);
  CHECK_FALSE(phi_star_for("lbfgs-fd", "BROWNDEN"));
  CHECK(is_least_squares_solver("lm-fd"));
  CHECK_FALSE(is_least_squares_solver("lbfgs-cd"));
}
