#include <cstdlib>
#include <filesystem>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "ccssp/io.hpp"
#include "commands.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using ccssp::cli::run;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "ccssp");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture_path() { return std::string(CCSSP_TEST_DATA) + "/two_path.json"; }

double field(const std::string& text, const std::string& key) {
  const std::regex re(key + ": ([-+0-9.eE]+)");
  std::smatch m;
  REQUIRE(std::regex_search(text, m, re));
  return std::stod(m[1]);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ccssp_cli_" + name + "_" + std::to_string(std::rand()));
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("solve on the two-path fixture") {
    const Result m = call({"solve", fixture_path(), "--case", "mcmp", "--epsilon", "0.05", "--gamma", "0.999"});
    REQUIRE(m.code == 0);
    CHECK(std::abs(field(m.out, "objective") - 2.019) <= 1e-3);
    CHECK(field(m.out, "mixture_failure_measure") <= 0.05 + 1e-6);

    const Result s = call({"solve", fixture_path(), "--case", "s3p-max"});
    REQUIRE(s.code == 0);
    CHECK(field(s.out, "objective") == doctest::Approx(3.0));
  }

  TEST_CASE("exit codes") {
    const Result inf = call({"solve", fixture_path(), "--case", "mcmp", "--epsilon", "1e-9"});
    CHECK(inf.code == ccssp::cli::kInfeasible);
    CHECK(inf.err.find("infeasible") != std::string::npos);
    CHECK(call({"solve", "/nonexistent/model.json", "--case", "mcmp"}).code == ccssp::cli::kInputError);
    CHECK(call({"solve", fixture_path(), "--case", "nope"}).code == ccssp::cli::kInputError);
    CHECK(call({"solve", fixture_path(), "--case", "mcmp", "--gamma", "1.5"}).code == ccssp::cli::kInputError);
    CHECK(call({"frobnicate"}).code == ccssp::cli::kInputError);
  }

  TEST_CASE("solve, simulate, report") {
    const fs::path dir = scratch("pipeline");
    const std::string policy = (dir / "policy.json").string();
    const std::string report = (dir / "report.json").string();
    REQUIRE(call({"solve", fixture_path(), "--case", "mcmp", "--policy-out", policy, "--report", report}).code == 0);
    CHECK(ccssp::io::read_file(report).find("\"mixture_j_cond\"") != std::string::npos);

    CHECK(call({"simulate", fixture_path(), policy, "--n", "0"}).code == ccssp::cli::kInputError);

    const std::string stats = (dir / "stats.json").string();
    const Result sim = call({"simulate", fixture_path(), policy, "--n", "2000", "--seed", "3", "--label", "mcmp",
                             "--out", stats, "--traj-count", "2", "--traj-dir", (dir / "traj").string()});
    REQUIRE(sim.code == 0);
    CHECK(fs::exists(dir / "traj"));
    const Result again = call({"simulate", fixture_path(), policy, "--n", "2000", "--seed", "3", "--label", "mcmp",
                               "--out", (dir / "stats2.json").string()});
    REQUIRE(again.code == 0);
    CHECK(ccssp::io::read_file(stats) == ccssp::io::read_file(dir / "stats2.json"));

    const Result rep = call({"report", stats});
    REQUIRE(rep.code == 0);
    CHECK(rep.out.find("| mcmp |") != std::string::npos);
    CHECK(rep.out.find("policy") != std::string::npos);

    const std::string wrong = (dir / "wrong.json").string();
    ccssp::io::write_file(wrong, R"({"format_version": "1", "kind": "stationary", "actions": [0, 5, 0, 0, 0]})");
    CHECK(call({"simulate", fixture_path(), wrong, "--n", "10"}).code == ccssp::cli::kInputError);
    fs::remove_all(dir);
  }

  TEST_CASE("augmented model dump") {
    const fs::path dir = scratch("dump");
    const std::string label = (dir / "m.json").string(), level = (dir / "s.json").string();
    REQUIRE(call({"solve", fixture_path(), "--case", "mcmp", "--dump-augmented", label}).code == 0);
    CHECK(ccssp::io::read_file(label).find("\"augmented_label\"") != std::string::npos);
    REQUIRE(call({"solve", fixture_path(), "--case", "s3p", "--cap", "10", "--dump-augmented", level}).code == 0);
    CHECK(ccssp::io::read_file(level).find("\"augmented_cost_level\"") != std::string::npos);
    CHECK(call({"solve", fixture_path(), "--case", "s3p-max", "--dump-augmented", level}).code ==
          ccssp::cli::kInputError);
    fs::remove_all(dir);
  }

  TEST_CASE("analyze") {
    const Result a = call({"analyze", fixture_path()});
    REQUIRE(a.code == 0);
    CHECK(a.out.find("\"dead_all\"") != std::string::npos);
  }

  TEST_CASE("robot build on a small grid") {
    const fs::path dir = scratch("robot");
    const std::string model = (dir / "robot.json").string();
    const Result b = call({"domain", "build-robot", "--grid", "10,10,8", "--noise-samples", "4", "--position-samples",
                           "1", "--heading-samples", "1", "--out", model});
    REQUIRE(b.code == 0);
    CHECK(fs::exists(dir / "robot.meta.json"));
    const Result s = call({"solve", model, "--case", "s3p-max", "--policy-out", (dir / "p.json").string()});
    REQUIRE(s.code == 0);
    const Result sim = call({"simulate", model, (dir / "p.json").string(), "--n", "100", "--traj-count", "3",
                             "--traj-dir", (dir / "traj").string()});
    REQUIRE(sim.code == 0);
    CHECK(sim.out.find("left of obstacle A") != std::string::npos);
    bool svg = false;
    for (const auto& e : fs::directory_iterator(dir / "traj")) svg = svg || e.path().extension() == ".svg";
    CHECK(svg);
    CHECK(call({"domain", "build-robot", "--grid", "1,10,8", "--out", model}).code == ccssp::cli::kInputError);
    fs::remove_all(dir);
  }
}
