#include "fdopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace fdopt {
namespace {

const std::set<std::string> kSolvers = {"lbfgs-fd", "lbfgs-cd", "lm-fd"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw SpecError("field '" + field + "': not a number: '" + text + "'");
}

std::uint64_t parse_seed(const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw SpecError("field 'seeds': not a nonnegative integer: '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw SpecError("field 'seeds': out of range: '" + text + "'");
  }
}

}  // namespace

bool is_least_squares_solver(const std::string& solver_id) { return solver_id.rfind("lm-", 0) == 0; }

std::optional<double> phi_star_for(const std::string& solver_id, const std::string& problem_id) {
  const CatalogEntry* e = find_entry(problem_id);
  if (!e) return std::nullopt;
  if (is_least_squares_solver(solver_id)) return e->residual ? e->residual->phi_star : std::nullopt;
  return e->smooth ? e->smooth->phi_star : std::nullopt;
}

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec;
  std::map<std::string, std::string> fields;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SpecError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!fields.emplace(key, trim(line.substr(eq + 1))).second) throw SpecError("field '" + key + "' given twice");
  }

  static const std::set<std::string> known = {"problems", "exclude", "solvers", "sigma_f", "seeds", "budget",
                                              "lipschitz", "lm_policy", "gap_tau", "output"};
  for (const auto& [key, value] : fields)
    if (!known.count(key)) throw SpecError("unknown field '" + key + "'");

  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("exclude")) {
    spec.exclude = split_list(*v);
    for (const auto& name : spec.exclude)
      if (!find_entry(name)) throw SpecError("field 'exclude': unknown problem '" + name + "'");
  }

  const auto* problems = get("problems");
  if (!problems) throw SpecError("field 'problems' is required");
  const auto names = split_list(*problems);
  if (names.empty()) throw SpecError("field 'problems' is empty");
  if (names.size() == 1 && names[0] == "all") {
    spec.all_problems = true;
    for (const auto& e : catalog()) spec.problems.push_back(e.name);
  } else {
    for (const auto& name : names) {
      if (!find_entry(name)) throw SpecError("field 'problems': unknown problem '" + name + "'");
      spec.problems.push_back(name);
    }
  }
  std::erase_if(spec.problems, [&](const std::string& p) {
    return std::find(spec.exclude.begin(), spec.exclude.end(), p) != spec.exclude.end();
  });

  const auto* solvers = get("solvers");
  if (!solvers) throw SpecError("field 'solvers' is required");
  spec.solvers = split_list(*solvers);
  if (spec.solvers.empty()) throw SpecError("field 'solvers' is empty");
  for (const auto& s : spec.solvers)
    if (!kSolvers.count(s)) throw SpecError("field 'solvers': unknown solver '" + s + "'");

  spec.sigma_f = {0.0};
  if (const auto* v = get("sigma_f")) {
    spec.sigma_f.clear();
    for (const auto& item : split_list(*v)) {
      const double s = parse_number("sigma_f", item);
      if (s < 0.0) throw SpecError("field 'sigma_f': negative noise level " + item);
      spec.sigma_f.push_back(s);
    }
    if (spec.sigma_f.empty()) throw SpecError("field 'sigma_f' is empty");
  }

  spec.seeds = {0};
  if (const auto* v = get("seeds")) {
    spec.seeds.clear();
    for (const auto& item : split_list(*v)) spec.seeds.push_back(parse_seed(item));
    if (spec.seeds.empty()) throw SpecError("field 'seeds' is empty");
  }

  if (const auto* v = get("budget")) {
    spec.budget = parse_number("budget", *v);
    if (spec.budget < 1.0) throw SpecError("field 'budget': must be at least 1");
  }

  if (const auto* v = get("lipschitz")) {
    if (*v == "mw_component") {
      spec.lipschitz_mode = LipschitzMode::mw_component;
    } else if (v->rfind("scheme:", 0) == 0) {
      spec.lipschitz_mode = LipschitzMode::scheme;
      const double k = parse_number("lipschitz", v->substr(7));
      if (k != std::floor(k) || k < 1 || k > 9) throw SpecError("field 'lipschitz': scheme must be 1..9");
      spec.scheme_k = static_cast<int>(k);
    } else if (v->rfind("fixed:", 0) == 0) {
      spec.lipschitz_mode = LipschitzMode::fixed_value;
      spec.fixed_value = parse_number("lipschitz", v->substr(6));
      if (!(spec.fixed_value > 0.0)) throw SpecError("field 'lipschitz': fixed value must be positive");
    } else {
      throw SpecError("field 'lipschitz': unknown mode '" + *v + "'");
    }
  }

  if (const auto* v = get("lm_policy")) {
    const auto policy = lipschitz_policy_from_string(*v);
    if (!policy) throw SpecError("field 'lm_policy': unknown policy '" + *v + "'");
    spec.lm_policy = *policy;
  }

  if (const auto* v = get("gap_tau")) {
    spec.gap_tau = parse_number("gap_tau", *v);
    if (spec.gap_tau < 0.0) throw SpecError("field 'gap_tau': must be nonnegative");
  }
  if (const auto* v = get("output")) spec.output = *v;
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read spec file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::vector<GridCell> expand_grid(const ExperimentSpec& spec) {
  std::vector<GridCell> cells;
  for (const auto& problem : spec.problems) {
    const CatalogEntry* e = find_entry(problem);
    if (!e) throw SpecError("field 'problems': unknown problem '" + problem + "'");
    for (const auto& solver : spec.solvers) {
      const bool has_form = is_least_squares_solver(solver) ? e->residual.has_value() : e->smooth.has_value();
      if (!has_form) {
        if (spec.all_problems) continue;
        throw SpecError("field 'problems': problem '" + problem + "' has no form usable by solver " + solver);
      }
      for (double sigma : spec.sigma_f)
        for (std::uint64_t seed : spec.seeds) cells.push_back({solver, problem, sigma, seed});
    }
  }
  return cells;
}

RunRecord run_cell(const ExperimentSpec& spec, const GridCell& cell) {
  const CatalogEntry* e = find_entry(cell.problem);
  if (!e) throw SpecError("unknown problem '" + cell.problem + "'");
  const NoiseModel noise = cell.sigma_f > 0.0 ? NoiseModel::uniform(cell.sigma_f, cell.seed) : NoiseModel::noiseless();
  const std::optional<double> phi_star = phi_star_for(cell.solver, cell.problem);
  std::optional<GapStop> gap;
  if (spec.gap_tau > 0.0 && phi_star) gap = GapStop{*phi_star, spec.gap_tau};

  SolverResult result;
  if (is_least_squares_solver(cell.solver)) {
    if (!e->residual) throw SpecError("problem '" + cell.problem + "' has no least-squares form");
    NoisyResidualOracle oracle(*e->residual, noise);
    LmConfig config;
    config.sigma_f = cell.sigma_f;
    config.lipschitz_policy = spec.lm_policy;
    config.max_evals = spec.budget * e->residual->n;
    config.gap_stop = gap;
    result = lm_minimize(oracle, e->residual->x0, config);
  } else {
    if (!e->smooth) throw SpecError("problem '" + cell.problem + "' has no smooth form");
    NoisyOracle oracle(*e->smooth, noise);
    LbfgsConfig config;
    config.scheme = cell.solver == "lbfgs-cd" ? DifferenceScheme::central : DifferenceScheme::forward;
    config.sigma_f = cell.sigma_f;
    config.lipschitz_mode = spec.lipschitz_mode;
    config.scheme_k = spec.scheme_k;
    config.fixed_value = spec.fixed_value;
    config.max_evals = static_cast<std::uint64_t>(spec.budget * e->smooth->n);
    config.gap_stop = gap;
    result = minimize(oracle, e->smooth->x0, config);
  }
  return make_record(cell.solver, cell.problem, cell.sigma_f, cell.seed, result);
}

GridOutcome run_grid(const ExperimentSpec& spec, int jobs) {
  const std::vector<GridCell> cells = expand_grid(spec);
  std::vector<std::optional<RunRecord>> slots(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      try {
        slots[i] = run_cell(spec, cells[i]);
      } catch (const std::exception& ex) {
        const auto& c = cells[i];
        errors[i] = c.solver + " on " + c.problem + ": " + ex.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  GridOutcome out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (slots[i]) out.records.push_back(std::move(*slots[i]));
    if (!errors[i].empty()) out.errors.push_back(errors[i]);
  }
  return out;
}

}  // namespace fdopt
