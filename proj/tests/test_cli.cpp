#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fillab/cli.hpp"
#include "fillab/io.hpp"
#include "fillab/toy_model.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fillab;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fillab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("classify: toy cusp-fold with degree and index") {
  const RunResult r = run_cli({"classify", "--toy", "--alpha", "0", "--beta",
                               "0", "--b", "-0.3333333333333333"});
  CHECK(r.code == 0);
  CHECK(r.out.find("CuspFold") != std::string::npos);
  CHECK(r.out.find("degree=2") != std::string::npos);
  CHECK(r.out.find("L0=0.444444") != std::string::npos);
}

TEST_CASE("classify: T-singularity for positive alpha") {
  const RunResult r = run_cli(
      {"classify", "--toy", "--alpha", "0.8", "--beta", "1", "--b", "-0.33"});
  CHECK(r.code == 0);
  CHECK(r.out.find("TSingularity") != std::string::npos);
}

TEST_CASE("errors: one diagnostic line naming the subcommand") {
  SUBCASE("domain error exits 1") {
    const RunResult r = run_cli({"boost-ts-curve", "--k-min", "0.2", "--k-max",
                                 "9.9", "--n", "10"});
    CHECK(r.code == 1);
    CHECK(count_occurrences(r.err, "\n") == 1);
    CHECK(r.err.find("boost-ts-curve") != std::string::npos);
  }
  SUBCASE("usage error exits 2") {
    const RunResult r = run_cli({"toy-bifset", "--definitely-not-a-flag", "1"});
    CHECK(r.code == 2);
    CHECK(count_occurrences(r.err, "\n") == 1);
    CHECK(r.err.find("toy-bifset") != std::string::npos);
  }
  SUBCASE("missing system file") {
    const RunResult r = run_cli({"classify", "--system", "/nonexistent.json"});
    CHECK(r.code == 1);
    CHECK(r.err.find("classify") != std::string::npos);
  }
}

TEST_CASE("toy-bifset: CSV + SVG artifacts, deterministic bytes") {
  const fs::path dir = fresh_dir("bifset");
  const std::vector<std::string> args{
      "--out", dir.string(), "toy-bifset", "--b", "-0.3333333", "--beta-max",
      "3",     "--n",        "40"};
  const RunResult r1 = run_cli(args);
  REQUIRE(r1.code == 0);
  const std::string csv1 = slurp(dir / "toy_bifset.csv");
  const std::string svg1 = slurp(dir / "toy_bifset.svg");
  CHECK(csv1.find("beta,alpha_TS,alpha_poly,alpha_flip") == 0);
  CHECK(svg1.find("<svg") == 0);
  const RunResult r2 = run_cli(args);
  REQUIRE(r2.code == 0);
  CHECK(slurp(dir / "toy_bifset.csv") == csv1);
  CHECK(slurp(dir / "toy_bifset.svg") == svg1);
}

TEST_CASE("toy-bifset honors --jobs without changing bytes") {
  const fs::path d1 = fresh_dir("jobs1");
  const fs::path d2 = fresh_dir("jobs2");
  REQUIRE(run_cli({"--out", d1.string(), "toy-bifset", "--n", "60"}).code == 0);
  REQUIRE(run_cli({"--out", d2.string(), "--jobs", "4", "toy-bifset", "--n",
                   "60"})
              .code == 0);
  CHECK(slurp(d1 / "toy_bifset.csv") == slurp(d2 / "toy_bifset.csv"));
}

TEST_CASE("render_svg: polyline count equals curve count") {
  io::SvgCurve two_points;
  two_points.name = "segment";
  two_points.pts = {Vec2(0, 0), Vec2(1, 1)};
  const std::string svg = io::render_svg({two_points});
  CHECK(count_occurrences(svg, "<polyline") == 1);
  CHECK_THROWS_AS(io::render_svg({}), EmptyInput);
}

TEST_CASE("simulate: trajectory and event CSVs appear") {
  const fs::path dir = fresh_dir("sim");
  const RunResult r =
      run_cli({"--out", dir.string(), "simulate", "--toy", "--alpha", "1.5",
               "--x0", "1,1,1", "--t-max", "30"});
  REQUIRE(r.code == 0);
  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(traj.find("arc_index,kind,t,x,y,z") == 0);
  CHECK(count_occurrences(traj, "\n") > 10);
  const std::string ev = slurp(dir / "trajectory_events.csv");
  CHECK(ev.find("t,type,x,y,z") == 0);
  CHECK(ev.find("SlidingEntry") != std::string::npos);
}

TEST_CASE("system JSON round-trip through files") {
  const fs::path dir = fresh_dir("json");
  const toy::ToyParams tp{0.0, 0.0, -1.0 / 3.0};
  const FilippovSystem sys = toy::make_system(tp);
  const fs::path file = dir / "toy.json";
  io::write_file(file.string(), io::system_to_json(sys));
  const RunResult r = run_cli({"classify", "--system", file.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("CuspFold") != std::string::npos);
  SUBCASE("malformed JSON is a domain error") {
    const fs::path bad = dir / "bad.json";
    io::write_file(bad.string(), "{\"switching\":\"w\"}");
    const RunResult rb = run_cli({"classify", "--system", bad.string()});
    CHECK(rb.code == 1);
  }
}

TEST_CASE("nf-clc: toy recast finds the stable CLC") {
  const fs::path dir = fresh_dir("nfclc");
  const RunResult r =
      run_cli({"--out", dir.string(), "nf-clc", "--toy", "--alpha", "0.85",
               "--beta", "1", "--b", "-0.3333333333333333"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("CLC") != std::string::npos);
  const std::string csv = slurp(dir / "nf_clc.csv");
  CHECK(csv.find("kind,L") == 0);
}

TEST_CASE("classify accepts a system file plus toy parameters for the table") {
  const fs::path dir = fresh_dir("clsys");
  const fs::path file = dir / "toy.json";
  io::write_file(file.string(),
                 io::system_to_json(toy::make_system({0.0, 0.0, -1.0 / 3.0})));
  const RunResult r =
      run_cli({"classify", "--system", file.string(), "--alpha", "0", "--beta",
               "0", "--b", "-0.3333333333333333"});
  CHECK(r.code == 0);
  CHECK(r.out.find("degree=2 L0=0.444444") != std::string::npos);
}

TEST_CASE("nf-nonexistence is --seed deterministic") {
  const fs::path dir = fresh_dir("nxseed");
  const RunResult a = run_cli({"--out", dir.string(), "--seed", "9",
                               "nf-nonexistence", "--trials", "6",
                               "--control-trials", "2"});
  const RunResult b = run_cli({"--out", dir.string(), "--seed", "9",
                               "nf-nonexistence", "--trials", "6",
                               "--control-trials", "2"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(dir / "nonexistence.csv").find("6,0,2,2") != std::string::npos);
}

TEST_CASE("unknown formats and non-finite overrides are usage errors") {
  SUBCASE("bad format") {
    const RunResult r = run_cli({"--formats", "csv,bogus", "toy-clc"});
    CHECK(r.code == 2);
    CHECK(r.err.find("bogus") != std::string::npos);
  }
  SUBCASE("nan override") {
    const RunResult r = run_cli({"toy-clc", "--alpha", "nan"});
    CHECK(r.code == 2);
  }
}

TEST_CASE("FILIPPOV_LAB_OUT overrides the output directory") {
  const fs::path dir = fresh_dir("envout");
  setenv("FILIPPOV_LAB_OUT", dir.string().c_str(), 1);
  const RunResult r = run_cli({"toy-clc", "--b", "-0.3333333", "--beta", "1",
                               "--alpha", "0.8"});
  unsetenv("FILIPPOV_LAB_OUT");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "toy_clc.csv"));
}

TEST_CASE("jets-check subcommand reports clean invariants") {
  const RunResult r = run_cli({"jets-check", "--trials", "40"});
  CHECK(r.code == 0);
  CHECK(r.out.find("max_linear_err") != std::string::npos);
}

TEST_CASE("boost-ts-curve emits the sampled curve") {
  const fs::path dir = fresh_dir("bts");
  const RunResult r = run_cli({"--out", dir.string(), "boost-ts-curve",
                               "--k-min", "1.1", "--k-max", "8.3", "--n",
                               "25"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "boost_ts_curve.csv");
  CHECK(csv.find("k,a_TS") == 0);
  CHECK(count_occurrences(csv, "\n") == 26);
}

TEST_CASE("boost-clc subcommand solves the reference anchor") {
  const fs::path dir = fresh_dir("bclc");
  const RunResult r = run_cli(
      {"--out", dir.string(), "boost-clc", "--k", "6", "--a", "1.3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("CLC x0=") != std::string::npos);
}
