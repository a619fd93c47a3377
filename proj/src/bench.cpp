#include "fdopt/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace fdopt {

double RunRecord::best_true_phi() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : trace) best = std::min(best, row.true_phi);
  return best;
}

RunRecord make_record(std::string solver_id, std::string problem_id, double sigma_f, std::uint64_t seed,
                      const SolverResult& result) {
  RunRecord rec{std::move(solver_id), std::move(problem_id), sigma_f, seed, {}, result.reason};
  rec.trace.reserve(result.trace.size());
  for (const auto& row : result.trace) {
    // Rows that cost nothing (a rejected LM step, say) repeat the previous
    // evaluation count; keep only the latest state at each count.
    if (!rec.trace.empty() && !(row.evals > rec.trace.back().evals)) rec.trace.pop_back();
    rec.trace.push_back({row.evals, row.noisy_f, row.true_phi});
  }
  return rec;
}

bool gap_target(double phi_k, double phi_star, double tau) {
  return phi_k - phi_star <= tau * std::max(1.0, std::abs(phi_star));
}

bool relative_target(double phi_k, double phi_baseline, double phi_0, double tau) {
  if (!(phi_0 > phi_baseline)) throw std::invalid_argument("relative_target: phi_0 must exceed the baseline");
  return phi_k - phi_baseline <= tau * (phi_0 - phi_baseline);
}

double evals_to_target(const RunRecord& record, const RowPredicate& predicate) {
  for (const auto& row : record.trace)
    if (predicate(record, row)) return row.evals;
  return kSentinel;
}

namespace {

using Key = std::tuple<std::string, double, std::uint64_t>;

Key key_of(const RunRecord& r) { return {r.problem_id, r.sigma_f, r.seed}; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<Key, const RunRecord*> index(const std::vector<RunRecord>& records, const char* side) {
  std::map<Key, const RunRecord*> out;
  for (const auto& r : records)
    if (!out.emplace(key_of(r), &r).second)
      throw std::invalid_argument(std::string("profile: duplicate run in set ") + side + " for " + r.problem_id);
  return out;
}

// log2(a / b), computed so that swapping the arguments negates the result
// exactly and scaling both by a power of two leaves it unchanged.
double log2_ratio(double a, double b) {
  if (a == b) return 0.0;
  return a > b ? std::log2(a / b) : -std::log2(b / a);
}

struct Entry {
  std::string label;
  double ratio;
  bool fa, fb;
};

template <class RatioFn>
Profile build_profile(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b, RatioFn ratio_of) {
  const auto ia = index(a, "A");
  const auto ib = index(b, "B");
  if (ia.size() != ib.size()) throw std::invalid_argument("profile: record sets differ in size");
  std::set<std::string> problems;
  for (const auto& [k, rec] : ia) problems.insert(std::get<0>(k));
  const bool unique = problems.size() == ia.size();

  std::vector<Entry> entries;
  for (const auto& [k, ra] : ia) {
    const auto it = ib.find(k);
    if (it == ib.end()) throw std::invalid_argument("profile: no partner for problem " + std::get<0>(k));
    std::string label = std::get<0>(k);
    if (!unique) label += ":" + fmt(std::get<1>(k)) + ":" + std::to_string(std::get<2>(k));
    Entry e{std::move(label), 0.0, false, false};
    e.ratio = ratio_of(*ra, *it->second, e.fa, e.fb);
    entries.push_back(std::move(e));
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.ratio < y.ratio; });

  Profile p;
  for (auto& e : entries) {
    p.labels.push_back(std::move(e.label));
    p.ratios.push_back(e.ratio);
    p.failed_a.push_back(e.fa);
    p.failed_b.push_back(e.fb);
  }
  return p;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    // stod rejects "inf"/"nan" spellings it did not produce; handle them here.
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::invalid_argument(context + ": not a number: '" + s + "'");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_field(const std::string& s, const char* what) {
  if (s.find_first_of(",\n\r") != std::string::npos)
    throw std::invalid_argument(std::string("csv: ") + what + " contains a separator: " + s);
}

const char* kRunsHeader = "solver_id,problem_id,sigma_f,seed,evals,noisy_f,true_phi,reason";
const char* kProfileHeader = "problem_id,ratio,failed_A,failed_B";

}  // namespace

Profile log_ratio_profile(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                          const RowPredicate& predicate) {
  return build_profile(a, b, [&](const RunRecord& ra, const RunRecord& rb, bool& fa, bool& fb) {
    const double ea = evals_to_target(ra, predicate);
    const double eb = evals_to_target(rb, predicate);
    fa = ea == kSentinel;
    fb = eb == kSentinel;
    return log2_ratio(ea, eb);
  });
}

Profile accuracy_profile(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                         const std::map<std::string, double>& phi_star) {
  return build_profile(a, b, [&](const RunRecord& ra, const RunRecord& rb, bool& fa, bool& fb) {
    const auto it = phi_star.find(ra.problem_id);
    if (it == phi_star.end()) throw std::invalid_argument("accuracy_profile: no phi* for " + ra.problem_id);
    fa = ra.trace.empty();
    fb = rb.trace.empty();
    const double ga = std::max(ra.best_true_phi() - it->second, kGapClamp);
    const double gb = std::max(rb.best_true_phi() - it->second, kGapClamp);
    return log2_ratio(ga, gb);
  });
}

std::string runs_csv(const std::vector<RunRecord>& records) {
  std::string out = std::string(kRunsHeader) + "\n";
  for (const auto& r : records) {
    check_field(r.solver_id, "solver_id");
    check_field(r.problem_id, "problem_id");
    const std::string prefix = r.solver_id + "," + r.problem_id + "," + fmt(r.sigma_f) + "," + std::to_string(r.seed) + ",";
    for (const auto& row : r.trace)
      out += prefix + fmt(row.evals) + "," + fmt(row.noisy_f) + "," + fmt(row.true_phi) + "," + to_string(r.reason) + "\n";
  }
  return out;
}

void emit_runs_csv(const std::vector<RunRecord>& records, const std::string& path) {
  write_file(path, runs_csv(records));
}

std::vector<RunRecord> parse_runs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRunsHeader) throw std::invalid_argument("runs csv: missing header");
  std::vector<RunRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = "runs csv line " + std::to_string(lineno);
    if (f.size() != 8) throw std::invalid_argument(where + ": expected 8 fields");
    const double sigma = to_double(f[2], where);
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(f[3]);
    } catch (const std::exception&) {
      throw std::invalid_argument(where + ": bad seed '" + f[3] + "'");
    }
    const auto reason = termination_reason_from_string(f[7]);
    if (!reason) throw std::invalid_argument(where + ": unknown reason '" + f[7] + "'");
    const bool same = !out.empty() && out.back().solver_id == f[0] && out.back().problem_id == f[1] &&
                      std::bit_cast<std::uint64_t>(out.back().sigma_f) == std::bit_cast<std::uint64_t>(sigma) &&
                      out.back().seed == seed;
    if (!same) out.push_back({f[0], f[1], sigma, seed, {}, *reason});
    out.back().trace.push_back({to_double(f[4], where), to_double(f[5], where), to_double(f[6], where)});
  }
  return out;
}

std::vector<RunRecord> read_runs_csv(const std::string& path) { return parse_runs_csv(read_file(path)); }

std::string profile_csv(const Profile& p) {
  std::string out = std::string(kProfileHeader) + "\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    check_field(p.labels[i], "problem_id");
    out += p.labels[i] + "," + fmt(p.ratios[i]) + "," + (p.failed_a[i] ? "1" : "0") + "," +
           (p.failed_b[i] ? "1" : "0") + "\n";
  }
  return out;
}

void emit_profile_csv(const Profile& profile, const std::string& path) { write_file(path, profile_csv(profile)); }

Profile parse_profile_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kProfileHeader) throw std::invalid_argument("profile csv: missing header");
  Profile p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw std::invalid_argument("profile csv: expected 4 fields");
    p.labels.push_back(f[0]);
    p.ratios.push_back(to_double(f[1], "profile csv"));
    p.failed_a.push_back(f[2] == "1");
    p.failed_b.push_back(f[3] == "1");
  }
  return p;
}

}  // namespace fdopt
