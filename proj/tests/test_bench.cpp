#include "fdopt/bench.hpp"
#include "fdopt/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace fdopt;
namespace fs = std::filesystem;

namespace {

RunRecord record(const std::string& solver, const std::string& problem, std::vector<TracePoint> trace,
                 double sigma = 0.0, std::uint64_t seed = 1) {
  return RunRecord{solver, problem, sigma, seed, std::move(trace), TerminationReason::budget};
}

// Row i hits the target when its true phi is at or below the threshold.
RowPredicate below(double threshold) {
  return [threshold](const RunRecord&, const TracePoint& row) { return row.true_phi <= threshold; };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("fdopt-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct Element {
  std::string tag;
  std::map<std::string, std::string> attrs;
};

std::vector<Element> elements(const std::string& svg, const std::string& cls) {
  std::vector<Element> out;
  const std::regex tag_re("<(\\w+) ([^>]*)>");
  const std::regex attr_re("([\\w-]+)=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tag_re); it != std::sregex_iterator(); ++it) {
    Element e{(*it)[1], {}};
    const std::string body = (*it)[2];
    for (auto a = std::sregex_iterator(body.begin(), body.end(), attr_re); a != std::sregex_iterator(); ++a)
      e.attrs[(*a)[1]] = (*a)[2];
    if (e.attrs["class"] == cls) out.push_back(e);
  }
  return out;
}

double attr(const Element& e, const std::string& name) { return std::stod(e.attrs.at(name)); }

}  // namespace

TEST_CASE("gap_target examples") {
  CHECK(gap_target(3.0, 3.0, 1e-9));
  CHECK_FALSE(gap_target(2e-6, 0.0, 1e-6));
  CHECK(gap_target(-10.0 + 5e-6, -10.0, 1e-6));
  CHECK_FALSE(gap_target(-10.0 + 2e-5, -10.0, 1e-6));
}

TEST_CASE("relative_target examples") {
  CHECK_FALSE(relative_target(10.0, 0.0, 10.0, 0.5));
  CHECK(relative_target(1.5, 1.5, 10.0, 1e-9));
  CHECK(relative_target(0.05, 0.0, 10.0, 1e-2));
  CHECK_FALSE(relative_target(0.2, 0.0, 10.0, 1e-2));
  CHECK_THROWS_AS(relative_target(0.0, 1.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(relative_target(0.0, 2.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("evals_to_target examples") {
  const RunRecord r = record("A", "P", {{10, 5, 5}, {20, 3, 3}, {30, 1, 1}, {40, 0.5, 0.5}});
  CHECK(evals_to_target(r, below(10.0)) == 10.0);
  CHECK(evals_to_target(r, below(-1.0)) == kSentinel);
  CHECK(kSentinel == std::ldexp(1.0, 40));
  CHECK(evals_to_target(r, below(1.0)) == 30.0);
}

TEST_CASE("make_record keeps strictly increasing evaluation counts") {
  SolverResult s;
  s.reason = TerminationReason::radius;
  for (double e : {1.0, 3.0, 3.0, 5.0, 5.0, 5.0, 6.5}) {
    IterationRecord row;
    row.evals = e;
    row.noisy_f = 10.0 - e;
    row.true_phi = 10.0 - e + 0.25;
    s.trace.push_back(row);
  }
  s.trace[2].noisy_f = -1.0;  // the later row at equal cost wins
  const RunRecord r = make_record("lm-fd", "P", 0.1, 4, s);
  REQUIRE(r.trace.size() == 4);
  CHECK(r.trace[1].evals == 3.0);
  CHECK(r.trace[1].noisy_f == -1.0);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].evals > r.trace[k - 1].evals);
  CHECK(r.reason == TerminationReason::radius);
  CHECK(r.best_true_phi() == doctest::Approx(3.75));
}

TEST_CASE("log_ratio_profile examples") {
  const std::vector<RunRecord> a = {record("A", "P1", {{4, 1, 1}, {8, 0, 0}}), record("A", "P2", {{6, 0, 0}}),
                                    record("A", "P3", {{2, 5, 5}})};
  std::vector<RunRecord> twice = a;
  for (auto& r : twice)
    for (auto& row : r.trace) row.evals *= 2.0;

  const Profile same = log_ratio_profile(a, a, below(0.0));
  CHECK(same.ratios == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(same.labels[2] == "P3");
  CHECK(same.failed(2));  // P3 never reaches the target on either side

  const Profile doubled = log_ratio_profile(twice, a, below(0.0));
  CHECK(doubled.ratios == std::vector<double>{0.0, 1.0, 1.0});  // P3 fails on both sides
  CHECK(doubled.labels == std::vector<std::string>{"P3", "P1", "P2"});

  std::vector<RunRecord> missing = a;
  missing.pop_back();
  CHECK_THROWS_AS(log_ratio_profile(a, missing, below(0.0)), std::invalid_argument);
  std::vector<RunRecord> renamed = a;
  renamed[0].problem_id = "Q";
  CHECK_THROWS_AS(log_ratio_profile(a, renamed, below(0.0)), std::invalid_argument);
}

TEST_CASE("log_ratio_profile: one-sided failures, antisymmetry and labels") {
  const std::vector<RunRecord> a = {record("A", "P", {{4, 0, 0}}, 0.0, 1), record("A", "P", {{4, 1, 1}}, 0.0, 2)};
  const std::vector<RunRecord> b = {record("B", "P", {{16, 0, 0}}, 0.0, 1), record("B", "P", {{2, 0, 0}}, 0.0, 2)};
  const Profile ab = log_ratio_profile(a, b, below(0.0));
  REQUIRE(ab.size() == 2);
  CHECK(ab.ratios[0] == -2.0);
  CHECK(ab.ratios[1] == std::log2(kSentinel / 2.0));
  CHECK(ab.failed_a[1]);
  CHECK_FALSE(ab.failed_b[1]);
  CHECK(ab.labels[0] == "P:0:1");
  for (double r : ab.ratios) CHECK(std::abs(r) <= std::log2(kSentinel));

  const Profile ba = log_ratio_profile(b, a, below(0.0));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ba.ratios[i] == -ab.ratios[1 - i]);
    CHECK(ba.failed_b[i] == ab.failed_a[1 - i]);
  }
}

TEST_CASE("accuracy_profile examples") {
  const std::map<std::string, double> star = {{"P", 1.0}, {"Q", 0.0}, {"R", 5.0}};
  const std::vector<RunRecord> a = {record("A", "P", {{1, 2, 1.0 + 1e-2}}), record("A", "Q", {{1, 0, 0.0}}),
                                    record("A", "R", {{1, 5, 5.0 - 1e-3}})};
  const std::vector<RunRecord> b = {record("B", "P", {{1, 2, 1.0 + 1e-6}}), record("B", "Q", {{1, 0, 0.0}}),
                                    record("B", "R", {{1, 5, 5.0 + 1e-16}})};
  const Profile p = accuracy_profile(a, b, star);
  REQUIRE(p.size() == 3);
  // Q: both at the optimum; R: negative raw gap clamps to 1e-16, and the
  // other side's 8.9e-16 (5 + 1e-16 rounds to the next double) likewise.
  std::map<std::string, double> by_label;
  for (std::size_t i = 0; i < p.size(); ++i) by_label[p.labels[i]] = p.ratios[i];
  CHECK(by_label["Q"] == 0.0);
  CHECK(by_label["P"] == doctest::Approx(std::log2(1e-2 / 1e-6)).epsilon(1e-4));
  CHECK(by_label["P"] == doctest::Approx(13.2877).epsilon(1e-5));
  CHECK(std::isfinite(by_label["R"]));
  CHECK(by_label["R"] <= 0.0);
  CHECK_THROWS_AS(accuracy_profile(a, b, {{"P", 1.0}}), std::invalid_argument);
}

TEST_CASE("runs csv: header only, round trip, errors") {
  CHECK(runs_csv({}) == "solver_id,problem_id,sigma_f,seed,evals,noisy_f,true_phi,reason\n");

  const std::vector<RunRecord> recs = {record("lbfgs-fd", "ROSENBR", {{3, 1.0 / 3.0, 0.1}, {7.5, -2e-300, 1e300}}, 1e-3, 9),
                                       record("lm-fd", "BARD", {{1.25, 4, 4}}, 0.0, 0)};
  const std::string text = runs_csv(recs);
  const auto back = parse_runs_csv(text);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].solver_id == recs[i].solver_id);
    CHECK(back[i].problem_id == recs[i].problem_id);
    CHECK(back[i].sigma_f == recs[i].sigma_f);
    CHECK(back[i].seed == recs[i].seed);
    CHECK(back[i].reason == recs[i].reason);
    REQUIRE(back[i].trace.size() == recs[i].trace.size());
    for (std::size_t k = 0; k < recs[i].trace.size(); ++k) {
      CHECK(back[i].trace[k].evals == recs[i].trace[k].evals);
      CHECK(back[i].trace[k].noisy_f == recs[i].trace[k].noisy_f);
      CHECK(back[i].trace[k].true_phi == recs[i].trace[k].true_phi);
    }
  }
  CHECK(runs_csv(back) == text);

  const fs::path dir = scratch_dir("csv");
  emit_runs_csv(recs, (dir / "runs.csv").string());
  CHECK(slurp(dir / "runs.csv") == text);
  CHECK(read_runs_csv((dir / "runs.csv").string()).size() == 2);
  CHECK_THROWS_AS(read_runs_csv((dir / "missing.csv").string()), std::runtime_error);
  CHECK_THROWS_WITH_AS(emit_runs_csv(recs, (dir / "no" / "such" / "runs.csv").string()),
                       doctest::Contains("no/such/runs.csv"), std::runtime_error);

  CHECK_THROWS_AS(parse_runs_csv("bogus\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_runs_csv(text + "a,b,c\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_runs_csv(text + "a,P,0,1,1,1,1,sleepy\n"), std::invalid_argument);
  CHECK_THROWS_AS(runs_csv({record("a,b", "P", {{1, 1, 1}})}), std::invalid_argument);
}

TEST_CASE("runs csv matches the frozen golden file") {
  // Short fixed-seed runs of both solver families through the grid runner.
  const ExperimentSpec spec = parse_spec(
      "problems = ROSENBR\n"
      "solvers = lbfgs-fd, lm-fd\n"
      "sigma_f = 1e-3\n"
      "seeds = 7\n"
      "budget = 20\n");
  const std::string got = runs_csv(run_grid(spec).records);
  const std::string golden = slurp(fs::path(FDOPT_TEST_DATA_DIR) / "golden_runs.csv");
  CHECK(got == golden);
}

TEST_CASE("profile csv round trip") {
  Profile p;
  p.labels = {"A", "B", "C"};
  p.ratios = {-1.5, 0.0, 40.0};
  p.failed_a = {false, false, true};
  p.failed_b = {false, true, false};
  const std::string text = profile_csv(p);
  CHECK(text.rfind("problem_id,ratio,failed_A,failed_B\n", 0) == 0);
  const Profile q = parse_profile_csv(text);
  CHECK(q.labels == p.labels);
  CHECK(q.ratios == p.ratios);
  CHECK(q.failed_a == p.failed_a);
  CHECK(q.failed_b == p.failed_b);
  CHECK(profile_csv(Profile{}) == "problem_id,ratio,failed_A,failed_B\n");
}

TEST_CASE("svg: empty profile draws axes only") {
  const std::string svg = profile_svg(Profile{});
  CHECK(elements(svg, "frame").size() == 1);
  CHECK(elements(svg, "zero").size() == 1);
  CHECK(elements(svg, "bar").empty());
  CHECK(elements(svg, "profile").empty());
  CHECK(elements(svg, "failure").empty());
}

TEST_CASE("svg: all-zero ratios give a flat line at zero") {
  Profile p;
  p.labels = {"a", "b", "c", "d"};
  p.ratios = {0, 0, 0, 0};
  p.failed_a = p.failed_b = {false, false, false, false};
  const SvgLayout L = profile_layout(p);
  const std::string svg = profile_svg(p);
  const auto line = elements(svg, "profile");
  REQUIRE(line.size() == 1);
  std::istringstream pts(line[0].attrs.at("points"));
  std::string pair;
  int count = 0;
  while (pts >> pair) {
    CHECK(std::stod(pair.substr(pair.find(',') + 1)) == doctest::Approx(L.zero_y));
    ++count;
  }
  CHECK(count == 8);
  for (const auto& b : elements(svg, "bar")) CHECK(attr(b, "height") == 0.0);
}

TEST_CASE("svg: five ratios against a hand-computed layout") {
  Profile p;
  p.labels = {"a", "b", "c", "d", "e"};
  p.ratios = {-3.0, -0.5, 0.0, 1.5, 2.25};
  p.failed_a = p.failed_b = {false, false, false, false, false};
  // 640 x 400 canvas, margin 50: plot area 540 x 300, zero line at y = 200,
  // peak 3 gives y_max = 3 and 50 px per unit, bars 108 px wide.
  const double xs[] = {50, 158, 266, 374, 482};
  const double hs[] = {150, 25, 0, 75, 112.5};
  const double ys[] = {200, 200, 200, 125, 87.5};

  const SvgLayout L = profile_layout(p);
  CHECK(L.y_max == 3.0);
  CHECK(L.zero_y == 200.0);
  const std::string svg = profile_svg(p, "A vs B");
  const auto bars = elements(svg, "bar");
  REQUIRE(bars.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CAPTURE(i);
    CHECK(attr(bars[i], "x") == doctest::Approx(xs[i]));
    CHECK(attr(bars[i], "y") == doctest::Approx(ys[i]));
    CHECK(attr(bars[i], "width") == doctest::Approx(108.0));
    CHECK(attr(bars[i], "height") == doctest::Approx(hs[i]));
  }
  CHECK(elements(svg, "profile").size() == 1);
  CHECK(elements(svg, "tick").size() == 3);
  CHECK(elements(svg, "failure").empty());
  const auto zero = elements(svg, "zero");
  REQUIRE(zero.size() == 1);
  CHECK(attr(zero[0], "y1") == 200.0);
  CHECK(svg.find("A vs B") != std::string::npos);
}

TEST_CASE("svg: failures sit at the cap with a marker") {
  Profile p;
  p.labels = {"a", "b", "c"};
  p.ratios = {-std::log2(kSentinel / 3.0), 0.5, std::log2(kSentinel / 5.0)};
  p.failed_a = {false, false, true};
  p.failed_b = {true, false, false};
  const SvgLayout L = profile_layout(p);
  CHECK(L.y_max == kPlotCap);
  CHECK(L.bars[0].value == -kPlotCap);
  CHECK(L.bars[2].value == kPlotCap);
  CHECK(L.bars[2].h == doctest::Approx(150.0));
  const std::string svg = profile_svg(p);
  const auto marks = elements(svg, "failure");
  REQUIRE(marks.size() == 2);
  CHECK(attr(marks[0], "cy") == doctest::Approx(350.0));
  CHECK(attr(marks[1], "cy") == doctest::Approx(50.0));

  const fs::path dir = scratch_dir("svg");
  emit_profile_svg(p, (dir / "p.svg").string());
  CHECK(slurp(dir / "p.svg") == svg);
}
