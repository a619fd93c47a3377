// Command-line front end: run experiment grids, build log-ratio profiles,
// inspect the catalog and probe differencing intervals at a point.

#include "fdopt/experiment.hpp"
#include "fdopt/fdiff.hpp"
#include "fdopt/lipschitz.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace fdopt;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_root() {
  if (const char* env = std::getenv("FDOPT_OUTPUT_ROOT"); env && *env) return env;
  return "fdopt-runs";
}

// A fresh directory under the output root, never an existing one.
fs::path timestamped_dir(const std::string& prefix) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  fs::path base = output_root() / (prefix + "-" + stamp);
  fs::path dir = base;
  for (int k = 1; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
  return dir;
}

fs::path prepare_dir(const std::string& requested, const std::string& prefix,
                     const std::vector<std::string>& files, bool force) {
  fs::path dir = requested.empty() ? timestamped_dir(prefix) : fs::path(requested);
  if (!requested.empty() && !force)
    for (const auto& f : files)
      if (fs::exists(dir / f))
        throw UsageError((dir / f).string() + " exists; pass --force to overwrite or choose another --out");
  fs::create_directories(dir);
  return dir;
}

int cmd_problems_list() {
  std::printf("%-10s %5s %5s  %-9s %-22s %s\n", "name", "n", "m", "forms", "phi*", "provenance");
  for (const auto& e : catalog()) {
    const int n = e.smooth ? e.smooth->n : e.residual->n;
    const std::string m = e.residual ? std::to_string(e.residual->m) : "-";
    std::string forms = e.smooth ? "smooth" : "";
    if (e.residual) forms += forms.empty() ? "lsq" : "+lsq";
    const auto phi = e.smooth ? e.smooth->phi_star : e.residual->phi_star;
    char buf[32] = "?";
    if (phi) std::snprintf(buf, sizeof buf, "%.10g", *phi);
    const std::string& prov = e.smooth ? e.smooth->provenance : e.residual->provenance;
    std::printf("%-10s %5d %5s  %-9s %-22s %s\n", e.name.c_str(), n, m.c_str(), forms.c_str(), buf, prov.c_str());
  }
  return kOk;
}

int cmd_run(const std::string& spec_path, const std::string& out, int jobs, bool force) {
  const ExperimentSpec spec = load_spec(spec_path);
  expand_grid(spec);  // surface spec errors before touching the file system
  const std::string requested = out.empty() ? spec.output : out;
  const fs::path dir = prepare_dir(requested, "run", {"runs.csv"}, force);

  const GridOutcome outcome = run_grid(spec, jobs);
  emit_runs_csv(outcome.records, (dir / "runs.csv").string());
  fs::copy_file(spec_path, dir / "spec.txt", fs::copy_options::overwrite_existing);
  for (const auto& e : outcome.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
  std::printf("%zu runs written to %s\n", outcome.records.size(), (dir / "runs.csv").string().c_str());
  return outcome.errors.empty() ? kOk : kInternal;
}

std::vector<RunRecord> select_solver(std::vector<RunRecord> records, const std::string& solver,
                                     const std::string& source) {
  if (!solver.empty()) {
    std::erase_if(records, [&](const RunRecord& r) { return r.solver_id != solver; });
    if (records.empty()) throw UsageError(source + ": no runs for solver " + solver);
    return records;
  }
  for (const auto& r : records)
    if (r.solver_id != records.front().solver_id)
      throw UsageError(source + " holds several solvers; pick one with --solver-a/--solver-b");
  return records;
}

using RunKey = std::tuple<std::string, double, std::uint64_t>;

int cmd_profile(const std::string& path_a, const std::string& path_b, const std::string& mode, double tau,
                const std::string& out, const std::string& solver_a, const std::string& solver_b, bool force) {
  if (!(tau > 0.0)) throw UsageError("--tau must be positive");
  std::vector<RunRecord> a, b;
  try {
    a = select_solver(read_runs_csv(path_a), solver_a, path_a);
    b = select_solver(read_runs_csv(path_b), solver_b, path_b);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const std::string& sid = a.front().solver_id;

  // Best true phi seen by either side, the reference where phi* is unknown.
  std::map<RunKey, double> best;
  std::map<std::string, double> best_by_problem;
  for (const auto* set : {&a, &b})
    for (const auto& r : *set) {
      const RunKey k{r.problem_id, r.sigma_f, r.seed};
      const double v = r.best_true_phi();
      auto [it, fresh] = best.emplace(k, v);
      if (!fresh) it->second = std::min(it->second, v);
      auto [jt, jfresh] = best_by_problem.emplace(r.problem_id, v);
      if (!jfresh) jt->second = std::min(jt->second, v);
    }

  Profile profile;
  try {
    if (mode == "evals") {
      const RowPredicate hit = [&](const RunRecord& r, const TracePoint& row) {
        if (const auto phi_star = phi_star_for(sid, r.problem_id)) return gap_target(row.true_phi, *phi_star, tau);
        const double base = best.at({r.problem_id, r.sigma_f, r.seed});
        const double phi0 = r.trace.front().true_phi;
        if (!(phi0 > base)) return true;  // solved at the start point
        return relative_target(row.true_phi, base, phi0, tau);
      };
      profile = log_ratio_profile(a, b, hit);
    } else if (mode == "accuracy") {
      std::map<std::string, double> phi_star;
      for (const auto& [problem, v] : best_by_problem) phi_star[problem] = phi_star_for(sid, problem).value_or(v);
      profile = accuracy_profile(a, b, phi_star);
    } else {
      throw UsageError("--mode must be evals or accuracy");
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const fs::path dir = prepare_dir(out, "profile", {"profile.csv", "profile.svg"}, force);
  emit_profile_csv(profile, (dir / "profile.csv").string());
  const std::string title = a.front().solver_id + " vs " + b.front().solver_id + " (" + mode + ")";
  emit_profile_svg(profile, (dir / "profile.svg").string(), title);
  std::size_t wins_a = 0, wins_b = 0;
  for (double r : profile.ratios) {
    if (r < 0) ++wins_a;
    if (r > 0) ++wins_b;
  }
  std::printf("%zu ratios; A better on %zu, B better on %zu; written to %s\n", profile.size(), wins_a, wins_b,
              dir.string().c_str());
  return kOk;
}

Vec parse_point(const std::string& text, int n) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("--x: not a number: '" + item + "'");
    }
  }
  if (static_cast<int>(values.size()) != n)
    throw UsageError("--x needs " + std::to_string(n) + " comma-separated values");
  return Eigen::Map<Vec>(values.data(), n);
}

int cmd_probe(const std::string& name, double sigma, std::uint64_t seed, const std::string& point) {
  const CatalogEntry* entry = find_entry(name);
  if (!entry) throw UsageError("unknown problem '" + name + "'");
  if (!entry->smooth) throw UsageError("problem '" + name + "' has no smooth form to probe");
  if (!(sigma >= 0.0)) throw UsageError("--sigma must be nonnegative");
  const SmoothProblem& problem = *entry->smooth;
  const int n = problem.n;
  const Vec x = point.empty() ? problem.x0 : parse_point(point, n);

  NoisyOracle oracle(problem, sigma > 0.0 ? NoiseModel::uniform(sigma, seed) : NoiseModel::noiseless());
  const double fx = oracle.value(x);
  std::printf("problem %s  n=%d  sigma_f=%g  seed=%llu\n", name.c_str(), n, sigma,
              static_cast<unsigned long long>(seed));
  std::printf("f(x) = %.10g  phi(x) = %.10g\n", fx, evaluate(problem, x));

  Vec L_mw = Vec::Constant(n, kCurvatureFloor);
  std::vector<bool> mw_failed(n, false);
  IntervalRule rule = IntervalRule::machine();
  if (sigma > 0.0) {
    const LipschitzEstimate est = estimate_component_lipschitz(oracle, x, sigma, MWParams{}, fx);
    L_mw = est.values;
    mw_failed = est.floor_applied;
    rule = IntervalRule::noise_optimal(sigma, L_mw);
    std::printf("intervals: noise_optimal from MW estimates (%llu evaluations)\n",
                static_cast<unsigned long long>(est.evals_spent));
  } else {
    std::printf("intervals: machine_eps\n");
  }
  const FdGradient g = fd_gradient(oracle, x, DifferenceScheme::forward, rule, fx);
  const Vec g_true = problem.has_gradient() ? problem.gradient(x) : Vec();

  std::printf("%3s %14s %12s %12s %12s %12s %15s %15s %12s\n", "i", "x_i", "L_mw", "L_hess", "h_i", "h_hess",
              "g_fd", "g_true", "abs_err");
  Vec levels(n);
  for (int i = 0; i < n; ++i) {
    const double h = interval(x[i], rule, DifferenceScheme::forward, i);
    double L_hess = std::nan(""), h_hess = std::nan("");
    if (problem.has_hessian()) {
      Vec e = Vec::Zero(n);
      e[i] = 1.0;
      L_hess = std::abs(problem.hessian_quadform(x, e));
      if (sigma > 0.0 && L_hess > 0.0) h_hess = noise_optimal_interval(sigma, L_hess, DifferenceScheme::forward);
    }
    levels[i] = gradient_noise_level(sigma, L_mw[i], DifferenceScheme::forward);
    const double gt = g_true.size() ? g_true[i] : std::nan("");
    char lbuf[24];
    std::snprintf(lbuf, sizeof lbuf, mw_failed[i] && sigma > 0.0 ? "%.4e*" : "%.4e", L_mw[i]);
    std::printf("%3d %14.6g %12s %12.4e %12.6g %12.6g %15.6e %15.6e %12.3e\n", i + 1, x[i], lbuf, L_hess, h, h_hess,
                g.g[i], gt, std::abs(g.g[i] - gt));
  }
  std::printf("predicted sigma_g = %.6e\n", full_gradient_noise_level(levels));
  if (sigma > 0.0) std::printf("(* = MW failed, floor 0.1 used)\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference optimization under noise: experiments, profiles, diagnostics"};
  app.require_subcommand(1);

  auto* problems = app.add_subcommand("problems", "Inspect the problem catalog");
  problems->require_subcommand(1);
  auto* list = problems->add_subcommand("list", "List catalog problems");

  std::string spec_path, run_out;
  int jobs = 1;
  bool force = false;
  auto* run = app.add_subcommand("run", "Run an experiment spec and write runs.csv");
  run->add_option("spec", spec_path, "Experiment spec file")->required();
  run->add_option("--out", run_out, "Output directory (default: timestamped under $FDOPT_OUTPUT_ROOT)");
  run->add_option("--jobs", jobs, "Parallel grid cells")->check(CLI::PositiveNumber);
  run->add_flag("--force", force, "Overwrite existing outputs in --out");

  std::string path_a, path_b, mode = "evals", profile_out, solver_a, solver_b;
  double tau = 1e-6;
  bool profile_force = false;
  auto* profile = app.add_subcommand("profile", "Log-ratio profile of two run sets");
  profile->add_option("A", path_a, "runs.csv for method A")->required();
  profile->add_option("B", path_b, "runs.csv for method B")->required();
  profile->add_option("--mode", mode, "evals or accuracy");
  profile->add_option("--tau", tau, "Target tolerance for evals mode");
  profile->add_option("--out", profile_out, "Output directory (default: timestamped)");
  profile->add_option("--solver-a", solver_a, "Solver id to take from A");
  profile->add_option("--solver-b", solver_b, "Solver id to take from B");
  profile->add_flag("--force", profile_force, "Overwrite existing outputs in --out");

  std::string probe_name, probe_x;
  double probe_sigma = 0.0;
  std::uint64_t probe_seed = 0;
  auto* probe = app.add_subcommand("probe", "Curvature estimates, intervals and gradient errors at a point");
  probe->add_option("problem", probe_name, "Catalog problem")->required();
  probe->add_option("--sigma", probe_sigma, "Noise level");
  probe->add_option("--seed", probe_seed, "Noise seed");
  probe->add_option("--x", probe_x, "Point as comma-separated values (default: x0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*list) return cmd_problems_list();
    if (*run) return cmd_run(spec_path, run_out, jobs, force);
    if (*profile) return cmd_profile(path_a, path_b, mode, tau, profile_out, solver_a, solver_b, profile_force);
    if (*probe) return cmd_probe(probe_name, probe_sigma, probe_seed, probe_x);
  } catch (const SpecError& e) {
    std::fprintf(stderr, "spec error: %s\n", e.what());
    return kUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kUsage;
}
