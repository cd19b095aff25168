#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynpop/builtin_games.hpp"
#include "dynpop/dynamics.hpp"
#include "dynpop/io.hpp"

using namespace dynpop;

namespace {

struct Run {
  int status;
  std::string out;
};

// Runs the CLI through the shell; stderr is merged into the captured output.
Run cli(const std::string& args) {
  std::string cmd = std::string(DYNPOP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "dynpop_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3, 1e-300, -2.5e17, 0.0})
    CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("trajectory json round-trip") {
  GameSpec hdh = hawk_dove_hunger();
  Trajectory traj = integrate_async(hdh, uniform_social_state(hdh), 0.5, 0.1);
  Trajectory back = trajectory_from_json(hdh, ojson::parse(trajectory_json(hdh, traj).dump()));
  REQUIRE(back.size() == traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(back.times[k] == traj.times[k]);
    CHECK(sup_distance(back.states[k], traj.states[k]) == 0.0);
  }
  CHECK(back.integrator == traj.integrator);

  std::ostringstream csv;
  write_trajectory_csv(csv, hdh, traj);
  std::string header = csv.str().substr(0, csv.str().find('\n'));
  CHECK(header == "t,d_0_0,d_0_1,pi_0_0_0,pi_0_0_1,pi_0_1_0,pi_0_1_1");
}

TEST_CASE("cli exit codes") {
  Run solve = cli("solve periodic-swap");
  CHECK(solve.status == 0);
  ojson report = ojson::parse(solve.out);
  CHECK(report["schema"] == 1);
  CHECK(report["converged"] == true);
  CHECK(report["state"]["d"][0][0].get<double>() == doctest::Approx(0.5));

  Run missing = cli("validate /nonexistent/game.json");
  CHECK(missing.status == 1);
  CHECK(ojson::parse(missing.out)["error"] == "SpecError");

  auto bad = scratch("bad.json");
  std::ofstream(bad) << "{\"types\": 1, \"states\": ";
  Run malformed = cli("validate " + bad.string());
  CHECK(malformed.status == 1);
  CHECK(malformed.out.find("SyntaxError") != std::string::npos);

  CHECK(cli("solve").status == 2);
  CHECK(cli("frobnicate hawk-dove-hunger").status == 2);
  CHECK(cli("solve no-such-game").status == 1);
  CHECK(cli("validate hawk-dove-hunger").status == 0);
  CHECK(cli("reduce-check hawk-dove-hunger --samples 50").status == 0);
}

TEST_CASE("cli outputs are deterministic and parse back") {
  GameSpec hdh = hawk_dove_hunger();
  auto a = scratch("a.json"), b = scratch("b.json");
  REQUIRE(cli("evolve hawk-dove-hunger --protocol br --eta 0.5 --t-end 50 --format json -o " + a.string()).status == 0);
  REQUIRE(cli("evolve hawk-dove-hunger --protocol br --eta 0.5 --t-end 50 --format json -o " + b.string()).status == 0);
  CHECK(slurp(a) == slurp(b));
  Trajectory traj = trajectory_from_json(hdh, ojson::parse(slurp(a)));
  CHECK(residuals(hdh, traj.back()).max() < 1e-5);

  auto c1 = scratch("abm1.csv"), c2 = scratch("abm2.csv");
  REQUIRE(cli("abm hawk-dove-hunger --mode state --n 100 --seeds 2 --t-end 1 --seed 5 -o " + c1.string()).status == 0);
  REQUIRE(cli("abm hawk-dove-hunger --mode state --n 100 --seeds 2 --t-end 1 --seed 5 -o " + c2.string()).status == 0);
  CHECK(slurp(c1) == slurp(c2));

  auto s = scratch("sync.csv");
  REQUIRE(cli("simulate periodic-swap --mode sync --t-end 4 -o " + s.string()).status == 0);
  std::string csv = slurp(s);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
