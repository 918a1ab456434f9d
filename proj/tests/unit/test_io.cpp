#include <string>

#include "ccssp/baselines.hpp"
#include "ccssp/errors.hpp"
#include "ccssp/game_solver.hpp"
#include "ccssp/io.hpp"
#include "ccssp/reachability.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ccssp;

namespace {

std::string parse_error_of(const std::string& text) {
  try {
    io::model_from_string(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("model round trip") {
    const Mdp m = fixtures::early_failure();
    const io::ModelFile f = io::model_from_string(io::model_to_string(m, 1));
    CHECK(f.mdp == m);
    CHECK(f.start == 1);
    CHECK_FALSE(io::model_from_string(io::model_to_string(m)).start.has_value());
    const std::string data = io::read_file(std::string(CCSSP_TEST_DATA) + "/two_path.json");
    CHECK(io::model_from_string(data).mdp == fixtures::two_path());
  }

  TEST_CASE("model errors name the offending state and action") {
    const std::string bad_sum = R"({"format_version": "1", "kind": "mdp", "cost_resolution": 1,
      "states": [[[[1, 0, 0]]], [[[1, 0, 1]], [[0.5, 0, 1], [0.4, 1, 1]]]]})";
    CHECK(contains(parse_error_of(bad_sum), "state 1 action 1"));
    const std::string bad_target = R"({"format_version": "1", "kind": "mdp", "cost_resolution": 1,
      "states": [[[[1, 0, 0]]], [[[1, 7, 1]]]]})";
    CHECK(contains(parse_error_of(bad_target), "state 1 action 0"));
    const std::string negative = R"({"format_version": "1", "kind": "mdp", "cost_resolution": 1,
      "states": [[[[1, 0, 0]]], [[[1, 0, -1]]]]})";
    CHECK(contains(parse_error_of(negative), "state 1 action 0"));
    const std::string off_grid = R"({"format_version": "1", "kind": "mdp", "cost_resolution": 0.5,
      "states": [[[[1, 0, 0]]], [[[1, 0, 0.3]]]]})";
    CHECK(contains(parse_error_of(off_grid), "state 1 action 0"));
    const std::string no_actions = R"({"format_version": "1", "kind": "mdp", "cost_resolution": 1,
      "states": [[[[1, 0, 0]]], []]})";
    CHECK(contains(parse_error_of(no_actions), "state 1"));
    CHECK(contains(parse_error_of("{\n\"format_version\": \"1\",\n oops}"), "line 3"));
    CHECK(contains(parse_error_of(R"({"format_version": "2", "kind": "mdp"})"), "format_version"));
    CHECK(contains(parse_error_of(R"({"format_version": "1", "kind": "policy"})"), "kind"));
  }

  TEST_CASE("policy round trips") {
    const Mdp m = fixtures::two_path();
    const ReachAnalysis a = analyze(m);
    const Policy det = StationaryPolicy::deterministic({0, 1, 0, 0, 0});
    CHECK(io::policy_from_string(io::policy_to_string(det)) == det);
    const Policy rnd = StationaryPolicy::randomized({{1.0}, {0.25, 0.75}, {1.0}, {1.0}, {1.0}});
    CHECK(io::policy_from_string(io::policy_to_string(rnd)) == rnd);

    GameConfig cfg;
    cfg.cap = 10.0;
    const Policy mixed_labeled = solve(m, 1, Objective::mcmp, cfg, a).policy();
    REQUIRE(std::holds_alternative<MixedPolicy>(mixed_labeled));
    CHECK(io::policy_from_string(io::policy_to_string(mixed_labeled)) == mixed_labeled);
    const Policy mixed_aug = solve(m, 1, Objective::s3p, cfg, a).policy();
    CHECK(io::policy_from_string(io::policy_to_string(mixed_aug)) == mixed_aug);
    const Policy labeled = report_mcmp_max(m, a, 1, 0.999).policy();
    CHECK(io::policy_from_string(io::policy_to_string(labeled)) == labeled);

    CHECK_THROWS_AS(io::policy_from_string(R"({"format_version": "1", "kind": "bogus"})"), ParseError);
  }

  TEST_CASE("stats round trip") {
    EpisodeStats s;
    s.n_episodes = 10;
    s.n_success = 7;
    s.n_truncated = 1;
    s.failure_counts = {{"wall", 2}};
    s.cond_mean_cost = 17.123456789012345;
    s.cond_cost_stddev = 0.1;
    s.mean_steps = 12.5;
    s.seed = 0xFFFFFFFFFFFFFFFFull;
    const auto [back, label] = io::stats_from_string(io::stats_to_string(s, "mcmp"));
    CHECK(back == s);
    CHECK(label == "mcmp");
    s.n_success = 8;
    CHECK_THROWS_AS(io::stats_from_string(io::stats_to_string(s, "x")), ParseError);
  }

  TEST_CASE("robot metadata round trip") {
    RobotConfig c;
    c.nx = 10;
    c.wall_cost = 100.0;
    c.penalty_on_entry = true;
    c.position_samples = 2;
    CHECK(io::robot_meta_from_string(io::robot_meta_to_string(c)) == c);
  }

  TEST_CASE("report serialization") {
    const Mdp m = fixtures::two_path();
    const SolveReport r = report_s3p_max(m, analyze(m), 1, 0.999);
    const std::string text = io::report_to_string(r);
    CHECK(contains(text, "\"method\": \"s3p-max\""));
    CHECK(contains(text, "\"format_version\": \"1\""));
  }
}
