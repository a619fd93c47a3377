#pragma once

#include "fdopt/solver.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fdopt {

/// Cost assigned to runs that never reach the target.
inline constexpr double kSentinel = 0x1.0p40;
/// Ratios beyond this magnitude are drawn at the cap.
inline constexpr double kPlotCap = 20.0;
/// Gaps are clamped here before taking logarithms.
inline constexpr double kGapClamp = 1e-16;

struct TracePoint {
  double evals = 0.0;
  double noisy_f = 0.0;
  double true_phi = 0.0;
};

struct RunRecord {
  std::string solver_id;
  std::string problem_id;
  double sigma_f = 0.0;
  std::uint64_t seed = 0;
  std::vector<TracePoint> trace;
  TerminationReason reason = TerminationReason::failure;

  /// Smallest true phi over the trace (infinity when empty).
  double best_true_phi() const;
};

/// Copies a solver trace into a record.
RunRecord make_record(std::string solver_id, std::string problem_id, double sigma_f, std::uint64_t seed,
                      const SolverResult& result);

/// phi_k - phi_star <= tau max(1, |phi_star|).
bool gap_target(double phi_k, double phi_star, double tau);

/// phi_k - baseline <= tau (phi_0 - baseline). Throws std::invalid_argument
/// when phi_0 <= baseline.
bool relative_target(double phi_k, double phi_baseline, double phi_0, double tau);

using RowPredicate = std::function<bool(const RunRecord&, const TracePoint&)>;

/// Evaluations at the first row meeting the predicate, else kSentinel.
double evals_to_target(const RunRecord& record, const RowPredicate& predicate);

struct Profile {
  std::vector<std::string> labels;  // one per ratio, same order
  std::vector<double> ratios;       // nondecreasing
  std::vector<bool> failed_a;
  std::vector<bool> failed_b;
  double sentinel = kSentinel;

  std::size_t size() const { return ratios.size(); }
  bool failed(std::size_t i) const { return failed_a[i] || failed_b[i]; }
};

/// log2(evals_A / evals_B) per (problem, sigma_f, seed), sorted ascending.
/// Throws std::invalid_argument if the two sets do not pair up exactly.
Profile log_ratio_profile(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                          const RowPredicate& predicate);

/// log2 of the ratio of clamped best gaps max(phi_best - phi*, 1e-16).
/// phi* is looked up by problem id; missing entries throw.
Profile accuracy_profile(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                         const std::map<std::string, double>& phi_star);

/// CSV with one row per trace point:
/// solver_id,problem_id,sigma_f,seed,evals,noisy_f,true_phi,reason
void emit_runs_csv(const std::vector<RunRecord>& records, const std::string& path);
std::string runs_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> read_runs_csv(const std::string& path);
std::vector<RunRecord> parse_runs_csv(const std::string& text);

/// CSV with one row per ratio: problem_id,ratio,failed_A,failed_B
void emit_profile_csv(const Profile& profile, const std::string& path);
std::string profile_csv(const Profile& profile);
Profile parse_profile_csv(const std::string& text);

/// Geometry of the profile plot, exposed so tests can recompute it.
struct SvgLayout {
  double width = 640.0;
  double height = 400.0;
  double margin = 50.0;
  double y_max = 1.0;  // symmetric vertical range [-y_max, y_max]
  double zero_y = 0.0;

  struct Bar {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
    double value = 0.0;  // ratio after capping
    bool failed = false;
  };
  std::vector<Bar> bars;
};

SvgLayout profile_layout(const Profile& profile);
std::string profile_svg(const Profile& profile, const std::string& title = "");
void emit_profile_svg(const Profile& profile, const std::string& path, const std::string& title = "");

}  // namespace fdopt
