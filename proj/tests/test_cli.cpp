// Drives the fdopt executable end to end.
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell with the output root pointed at `root`.
Run cli(const std::string& args, const fs::path& root) {
  const std::string cmd = "cd '" + root.string() + "' && FDOPT_OUTPUT_ROOT='" + root.string() + "/out' '" +
                          FDOPT_CLI_PATH + "' " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("fdopt-cli-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("cli: problems list") {
  const fs::path d = scratch("list");
  const Run r = cli("problems list", d);
  CHECK(r.status == 0);
  CHECK(r.out.find("DENSCHNE") != std::string::npos);
  CHECK(r.out.find("BROWNAL") != std::string::npos);
}

TEST_CASE("cli: run writes one record and is deterministic") {
  const fs::path d = scratch("run");
  write(d / "spec.txt", "problems = ROSENBR\nsolvers = lbfgs-fd\nsigma_f = 0\n");
  const Run a = cli("run spec.txt --out first", d);
  REQUIRE(a.status == 0);
  const std::string csv = slurp(d / "first" / "runs.csv");
  CHECK(csv.rfind("solver_id,problem_id,sigma_f,seed,evals,noisy_f,true_phi,reason\n", 0) == 0);
  CHECK(csv.find("lbfgs-fd,ROSENBR,0,0,") != std::string::npos);
  CHECK(slurp(d / "first" / "spec.txt") == slurp(d / "spec.txt"));

  const Run b = cli("run spec.txt --out second --jobs 3", d);
  REQUIRE(b.status == 0);
  CHECK(slurp(d / "second" / "runs.csv") == csv);

  // Existing outputs are never overwritten silently.
  const Run again = cli("run spec.txt --out first", d);
  CHECK(again.status == 2);
  CHECK(again.out.find("--force") != std::string::npos);
  CHECK(cli("run spec.txt --out first --force", d).status == 0);

  // Without --out each run gets a fresh directory.
  CHECK(cli("run spec.txt", d).status == 0);
  CHECK(cli("run spec.txt", d).status == 0);
  int dirs = 0;
  for (const auto& e : fs::directory_iterator(d / "out")) dirs += e.is_directory();
  CHECK(dirs == 2);
}

TEST_CASE("cli: spec errors exit with status 2") {
  const fs::path d = scratch("spec");
  write(d / "bad.txt", "problems = ROSENBR, NOSUCHPROBLEM\nsolvers = lbfgs-fd\n");
  const Run r = cli("run bad.txt", d);
  CHECK(r.status == 2);
  CHECK(r.out.find("NOSUCHPROBLEM") != std::string::npos);
  write(d / "bad2.txt", "problems = ROSENBR\nsolvers = lbfgs-fd\nbudget = soon\n");
  const Run r2 = cli("run bad2.txt", d);
  CHECK(r2.status == 2);
  CHECK(r2.out.find("budget") != std::string::npos);
  CHECK(cli("run missing.txt", d).status == 2);
  CHECK(cli("frobnicate", d).status == 2);
}

TEST_CASE("cli: profile self against self is all zeros") {
  const fs::path d = scratch("self");
  write(d / "spec.txt", "problems = ROSENBR, HELIX\nsolvers = lbfgs-fd\nsigma_f = 1e-3\nseeds = 1\nbudget = 50\n");
  REQUIRE(cli("run spec.txt --out r", d).status == 0);
  const Run p = cli("profile r/runs.csv r/runs.csv --out p", d);
  REQUIRE(p.status == 0);
  const std::string csv = slurp(d / "p" / "profile.csv");
  CHECK(lines(csv) == 3);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) CHECK(line.find(",0,") != std::string::npos);
  CHECK(fs::exists(d / "p" / "profile.svg"));
}

TEST_CASE("cli: evals profile equals the library profile") {
  const fs::path d = scratch("evals");
  write(d / "spec.txt",
        "problems = ROSENBR, HELIX, BOX3D\nsolvers = lbfgs-fd, lbfgs-cd\nsigma_f = 0\nbudget = 200\n");
  REQUIRE(cli("run spec.txt --out r", d).status == 0);
  const Run p = cli("profile r/runs.csv r/runs.csv --solver-a lbfgs-fd --solver-b lbfgs-cd --tau 1e-6 --out p", d);
  REQUIRE(p.status == 0);
  // Mixed-solver files need an explicit choice.
  CHECK(cli("profile r/runs.csv r/runs.csv --out q", d).status == 2);
  CHECK(lines(slurp(d / "p" / "profile.csv")) == 4);
}

TEST_CASE("cli: accuracy profile on a hand-made fixture") {
  const fs::path d = scratch("acc");
  const std::string header = "solver_id,problem_id,sigma_f,seed,evals,noisy_f,true_phi,reason\n";
  // All three problems have phi* = 0 in the smooth form.
  write(d / "a.csv", header +
                         "lbfgs-fd,ROSENBR,0,0,1,1,0.5,budget\n"
                         "lbfgs-fd,ROSENBR,0,0,2,1,0.01,budget\n"
                         "lbfgs-fd,HELIX,0,0,1,1,1e-4,budget\n"
                         "lbfgs-fd,CUBE,0,0,1,1,1e-8,budget\n");
  write(d / "b.csv", header +
                         "lbfgs-cd,ROSENBR,0,0,1,1,1e-6,budget\n"
                         "lbfgs-cd,HELIX,0,0,1,1,1e-4,budget\n"
                         "lbfgs-cd,CUBE,0,0,1,1,0,budget\n");
  const Run p = cli("profile a.csv b.csv --mode accuracy --out p", d);
  REQUIRE(p.status == 0);
  std::istringstream in(slurp(d / "p" / "profile.csv"));
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> got;
  while (std::getline(in, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    got[line.substr(0, c1)] = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
  }
  REQUIRE(got.size() == 3);
  CHECK(got["ROSENBR"] == doctest::Approx(std::log2(1e-2 / 1e-6)));
  CHECK(got["HELIX"] == 0.0);
  CHECK(got["CUBE"] == doctest::Approx(std::log2(1e-8 / 1e-16)));
}

TEST_CASE("cli: unpaired profile inputs exit with status 2") {
  const fs::path d = scratch("unpaired");
  const std::string header = "solver_id,problem_id,sigma_f,seed,evals,noisy_f,true_phi,reason\n";
  write(d / "a.csv", header + "lbfgs-fd,ROSENBR,0,0,1,1,1,budget\n");
  write(d / "b.csv", header + "lbfgs-cd,HELIX,0,0,1,1,1,budget\n");
  CHECK(cli("profile a.csv b.csv --out p", d).status == 2);
  CHECK(cli("profile a.csv nothere.csv --out p", d).status == 2);
  CHECK(cli("profile a.csv a.csv --mode sideways --out p", d).status == 2);
}

TEST_CASE("cli: probe") {
  const fs::path d = scratch("probe");
  const Run noisy = cli("probe DENSCHNE --sigma 0.1 --seed 1", d);
  REQUIRE(noisy.status == 0);
  CHECK(noisy.out.find("6.7048e-04") != std::string::npos);
  CHECK(noisy.out.find("20.539") != std::string::npos);

  const Run quiet = cli("probe DENSCHNE", d);
  REQUIRE(quiet.status == 0);
  CHECK(quiet.out.find("machine_eps") != std::string::npos);
  CHECK(quiet.out.find("2.98023e-08") != std::string::npos);

  const Run at = cli("probe ROSENBR --x 0.5,0.5", d);
  CHECK(at.status == 0);
  CHECK(cli("probe NOSUCH", d).status == 2);
  CHECK(cli("probe ROSENBR --x 1,2,3", d).status == 2);
}
