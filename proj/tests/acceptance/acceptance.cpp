// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "ccssp/augmentation.hpp"
#include "ccssp/baselines.hpp"
#include "ccssp/evaluation.hpp"
#include "ccssp/game_solver.hpp"
#include "ccssp/io.hpp"
#include "ccssp/reachability.hpp"
#include "ccssp/robot_domain.hpp"
#include "ccssp/simulator.hpp"
#include "commands.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace ccssp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

int g_failures = 0;

void print(int id, const std::string& title, Verdict& v, double secs) {
  if (!v.pass) ++g_failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " | " << v.detail.str()
            << std::fixed << std::setprecision(2) << secs << " s" << std::defaultfloat << std::setprecision(6) << std::endl;
}

std::vector<Mdp> fixture_models() {
  return {fixtures::two_path(), fixtures::unit_chain(), fixtures::no_dead_end(), fixtures::early_failure()};
}

// 1. Reachability against exhaustive enumeration.
void criterion_reachability() {
  const auto t0 = Clock::now();
  Verdict v;
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Mdp m = fixtures::random_mdp(rng);
    const ReachAnalysis a = analyze(m);
    const oracle::ReachExtremes e = oracle::reach_extremes(m);
    for (std::size_t x = 0; x < m.num_states(); ++x) {
      worst = std::max({worst, std::abs(a.p_max[x] - e.p_max[x]), std::abs(a.p_min[x] - e.p_min[x])});
      v.require(a.is_dead[x] == (e.p_max[x] == 0.0), "dead_all set of model " + std::to_string(i));
      v.require(a.is_attention[x] == (x != 0 && e.p_min[x] == 0.0), "attention set of model " + std::to_string(i));
    }
  }
  const double secs = seconds_since(t0);
  v.require(worst <= 1e-9, "probability error");
  v.require(secs < 30.0, "runtime");
  v.detail << "200 models, max |p - oracle| " << worst << ", ";
  print(1, "reachability matches enumeration", v, secs);
}

// 2. Discounted failure measure against failure probability.
void criterion_constraint_approximation() {
  const auto t0 = Clock::now();
  Verdict v;
  std::mt19937_64 rng(2002);
  std::vector<Mdp> models = fixture_models();
  for (int i = 0; i < 50; ++i) models.push_back(fixtures::random_mdp(rng));
  const double gammas[] = {0.9, 0.99, 0.999, 0.9999};
  std::size_t checks = 0, tight_checks = 0;
  double worst_gap = 0.0;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Mdp& m = models[mi];
    oracle::for_each_policy(m, [&](const std::vector<ActionId>& pol) {
      const StationaryPolicy p = StationaryPolicy::deterministic(pol);
      const ValueVec reach = reach_probability(m, p);
      const oracle::Vector hit = oracle::hitting_time_on_success(m, pol);
      std::vector<ValueVec> l;
      for (double g : gammas) l.push_back(discounted_failure_vector(m, p, g));
      const ValueVec tight = discounted_failure_vector(m, p, 1.0 - 1e-5);
      for (std::size_t x = 1; x < m.num_states(); ++x) {
        const double fail = 1.0 - reach[x];
        for (std::size_t k = 0; k < l.size(); ++k) {
          ++checks;
          v.require(l[k][x] >= fail - 1e-12, "lower bound, model " + std::to_string(mi));
          if (k > 0) v.require(l[k][x] <= l[k - 1][x] + 1e-12, "monotone in gamma, model " + std::to_string(mi));
        }
        if (hit[x] <= 100.0) {
          ++tight_checks;
          const double gap = std::abs(tight[x] - fail);
          worst_gap = std::max(worst_gap, gap);
          v.require(gap <= 1e-3, "limit, model " + std::to_string(mi));
        }
      }
    });
  }
  const double secs = seconds_since(t0);
  v.require(secs < 60.0, "runtime");
  v.detail << models.size() << " models, " << checks << " bound checks, " << tight_checks
           << " limit checks, worst limit gap " << worst_gap << ", ";
  print(2, "discounted failure measure bounds and limit", v, secs);
}

// 3. Minimax equality on the label model.
Mdp minimax_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  fixtures::RandomSpec spec;
  spec.min_states = spec.max_states = 5;
  spec.max_actions = 2;
  spec.dead_end_chance = 0.25;
  while (true) {
    Mdp m = fixtures::random_mdp(rng, spec);
    const ReachAnalysis a = analyze(m);
    bool has_dead = false, has_choice = false;
    for (std::size_t x = 1; x < m.num_states(); ++x) {
      has_dead = has_dead || a.is_dead[x];
      has_choice = has_choice || m.num_actions(static_cast<StateId>(x)) > 1;
    }
    if (has_dead && has_choice && !a.is_dead[1] && a.p_max[1] < 1.0) return m;
  }
}

// (J_obj, J_cond) at `start` for every deterministic row choice, by dense solves.
std::vector<std::pair<double, double>> all_row_lines(const AugmentedM& aug, StateId start) {
  const CostModel& cm = aug.model;
  const std::size_t n = cm.num_states();
  const auto art = static_cast<std::size_t>(aug.artificial());
  std::vector<std::pair<double, double>> lines;
  std::vector<std::size_t> pick(n, 0);
  while (true) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 2);
    for (std::size_t s = 0; s < n; ++s) {
      if (s == art) continue;
      const std::size_t r = cm.first_row(static_cast<StateId>(s)) + pick[s];
      b(static_cast<Eigen::Index>(s), 0) = cm.obj(r);
      b(static_cast<Eigen::Index>(s), 1) = cm.cond(r);
      const auto w = cm.weights(r);
      const auto to = cm.successors(r);
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (static_cast<std::size_t>(to[k]) != art) a(static_cast<Eigen::Index>(s), to[k]) -= w[k];
      }
    }
    const Eigen::MatrixXd sol = a.fullPivLu().solve(b);
    lines.emplace_back(sol(start, 0), sol(start, 1));
    std::size_t s = 0;
    for (; s < n; ++s) {
      if (++pick[s] < cm.num_rows(static_cast<StateId>(s))) break;
      pick[s] = 0;
    }
    if (s == n) break;
  }
  return lines;
}

void criterion_minimax() {
  const auto t0 = Clock::now();
  Verdict v;
  const double gamma = 0.95, eps = 0.1;
  double worst = 0.0;
  std::size_t policies = 0;
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const Mdp m = minimax_model(seed);
    const AugmentedM aug = build_m(m, gamma, analyze(m));
    const auto lines = all_row_lines(aug, 1);
    policies += lines.size();
    for (double c : {0.5, 2.0, 5.0}) {
      const double k = c / eps;
      double brute = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i; j < lines.size(); ++j) {
          brute = std::min(brute, oracle::min_max_two_lines(lines[i].first, k * lines[i].second, lines[j].first,
                                                            k * lines[j].second));
        }
      }
      GameConfig cfg;
      cfg.gamma = gamma;
      cfg.epsilon = eps;
      const AlphaSearch s = maximize_alpha(aug.model, 1, Objective::mcmp, c, eps, cfg);
      const double err = std::abs(s.value - brute);
      worst = std::max(worst, err);
      v.require(err <= 1e-5, "seed " + std::to_string(seed) + " c " + std::to_string(c));
    }
  }
  v.detail << "3 models, " << policies << " augmented policies, 9 (model, c) pairs, worst |maxmin - minmax| " << worst
           << ", ";
  print(3, "minimax equality", v, seconds_since(t0));
}

// 4. Two-path fixture through the command line.
double parse_field(const std::string& text, const std::string& key) {
  std::smatch m;
  if (!std::regex_search(text, m, std::regex(key + ": ([-+0-9.eE]+)"))) return std::nan("");
  return std::stod(m[1]);
}

std::string two_path_cli() {
  std::ostringstream out, err;
  const int code = cli::run({"ccssp", "solve", std::string(CCSSP_TEST_DATA) + "/two_path.json", "--case", "mcmp",
                             "--epsilon", "0.05", "--gamma", "0.999"},
                            out, err);
  return "exit " + std::to_string(code) + "\n" + out.str() + err.str();
}

void criterion_two_path(std::string& transcript) {
  const auto t0 = Clock::now();
  Verdict v;
  transcript = two_path_cli();
  const double secs = seconds_since(t0);
  const double obj = parse_field(transcript, "objective");
  const double fail = parse_field(transcript, "mixture_failure_measure");
  // Closed-form mixing of the two stationary policies.
  const double gamma = 0.999;
  const double risky_obj = 0.9 + gamma * 0.1, risky_cond = (1 - gamma) + gamma * 0.1;
  const double safe_obj = 3.0, safe_cond = 1 - gamma;
  const double w = (0.05 - safe_cond) / (risky_cond - safe_cond);
  const double oracle_obj = w * risky_obj + (1 - w) * safe_obj;
  v.require(transcript.rfind("exit 0", 0) == 0, "exit code");
  v.require(std::abs(obj - 2.019) <= 1e-3, "objective");
  v.require(std::abs(obj - oracle_obj) <= 1e-3, "objective vs closed form");
  v.require(std::abs(fail - 0.05) <= 1e-4, "failure measure");
  v.require(secs < 5.0, "runtime");
  v.detail << std::setprecision(10) << "objective " << obj << " (closed form " << oracle_obj << "), failure measure "
           << fail << ", " << std::setprecision(6);
  print(4, "two-path reproduction", v, secs);
}

// 5-8. Robot experiments.
struct RobotRun {
  std::string name;
  SolveReport report;
  EpisodeStats stats;
  int left = 0;
  int left_success = 0;
  double solve_seconds = 0.0;
};

struct RobotSuite {
  std::vector<RobotRun> g1, g100;
  std::string transcript;  // serialized reports and stats, compared across repeats
};

std::vector<RobotRun> robot_runs(double g_wall, std::ostream& log) {
  RobotConfig cfg;
  cfg.wall_cost = g_wall;
  const RobotModel rm = build_robot_mdp(cfg);
  const ReachAnalysis a = analyze(rm.mdp);
  const RobotEnvironment env(rm.mdp, rm.config);
  GameConfig gc;  // epsilon 0.05, gamma 0.999, cap 50
  std::vector<RobotRun> runs;
  for (const std::string name : {"s3p-max", "mcmp-max", "s3p", "mcmp"}) {
    RobotRun r;
    r.name = name;
    const auto t0 = Clock::now();
    if (name == "s3p-max") r.report = report_s3p_max(rm.mdp, a, rm.start, gc.gamma);
    else if (name == "mcmp-max") r.report = report_mcmp_max(rm.mdp, a, rm.start, gc.gamma);
    else r.report = solve(rm.mdp, rm.start, name == "s3p" ? Objective::s3p : Objective::mcmp, gc, a);
    r.solve_seconds = seconds_since(t0);
    const Policy pol = r.report.policy();
    r.stats = monte_carlo(env, pol, 100'000, 0);
    RobotEnvironment route_env(rm.mdp, rm.config);
    for (std::uint64_t i = 0; i < 50; ++i) {
      const Trajectory t = run_episode(route_env, pol, episode_seed(0, i));
      if (t.outcome != EpisodeOutcome::success) continue;
      ++r.left_success;
      if (passes_left_of_a(rm.config, t.positions)) ++r.left;
    }
    log << "  g=" << g_wall << " " << name << ": objective " << r.report.objective_value << ", success "
        << r.stats.n_success << "/" << r.stats.n_episodes << ", cond. cost " << r.stats.cond_mean_cost
        << ", failures " << r.stats.failures() << " (A " << r.stats.failure_counts["obstacle_a"] << ", B "
        << r.stats.failure_counts["obstacle_b"] << ", wall " << r.stats.failure_counts["wall"] << "), left of A "
        << r.left << "/" << r.left_success << ", solve " << std::fixed << std::setprecision(1) << r.solve_seconds
        << " s" << std::defaultfloat << std::setprecision(6) << '\n';
    runs.push_back(std::move(r));
  }
  return runs;
}

RobotSuite robot_suite(std::ostream& log) {
  RobotSuite s;
  s.g1 = robot_runs(1.0, log);
  s.g100 = robot_runs(100.0, log);
  for (const auto* set : {&s.g1, &s.g100}) {
    for (const RobotRun& r : *set) {
      s.transcript += io::report_to_string(r.report);
      s.transcript += io::stats_to_string(r.stats, r.name);
      s.transcript += std::to_string(r.left) + "/" + std::to_string(r.left_success) + "\n";
    }
  }
  return s;
}

const RobotRun& by_name(const std::vector<RobotRun>& runs, const std::string& name) {
  for (const RobotRun& r : runs) {
    if (r.name == name) return r;
  }
  throw std::logic_error("missing run " + name);
}

std::size_t wall_hits(const RobotRun& r) {
  const auto it = r.stats.failure_counts.find("wall");
  return it == r.stats.failure_counts.end() ? 0 : it->second;
}

void criteria_robot(const RobotSuite& s, double secs) {
  {
    Verdict v;
    const double sigma = std::sqrt(0.05 * 0.95 / 1e5);
    int checked = 0;
    for (const auto* set : {&s.g1, &s.g100}) {
      for (const RobotRun& r : *set) {
        if (!r.report.feasible) continue;
        ++checked;
        v.require(r.stats.failure_frequency() <= 0.05 + 3 * sigma, r.name);
        v.detail << r.name << " " << r.stats.failure_frequency() << ", ";
      }
    }
    v.require(checked == 8, "all eight policies feasible");
    print(5, "feasibility certificate (failure frequency <= 0.05 + 3 sigma)", v, secs);
  }
  {
    Verdict v;
    const double ms = by_name(s.g1, "s3p-max").stats.cond_mean_cost;
    const double mm = by_name(s.g1, "mcmp-max").stats.cond_mean_cost;
    const double ps = by_name(s.g1, "s3p").stats.cond_mean_cost;
    const double pm = by_name(s.g1, "mcmp").stats.cond_mean_cost;
    v.require(ps <= 0.92 * ms, "s3p vs s3p-max");
    v.require(pm <= 0.92 * mm, "mcmp vs mcmp-max");
    for (const std::string n : {"s3p-max", "mcmp-max"}) {
      v.require(by_name(s.g1, n).stats.failure_frequency() <= 1e-3, n + " failure frequency");
    }
    v.detail << "cond. cost s3p " << ps << " vs s3p-max " << ms << " (" << 100 * (1 - ps / ms) << "% lower), mcmp "
             << pm << " vs mcmp-max " << mm << " (" << 100 * (1 - pm / mm) << "% lower), max-policy failures "
             << by_name(s.g1, "s3p-max").stats.failures() << " and " << by_name(s.g1, "mcmp-max").stats.failures()
             << ", ";
    print(6, "g = 1 table: constrained policies cheaper, max policies safe", v, secs);
  }
  {
    Verdict v;
    const double m1 = static_cast<double>(wall_hits(by_name(s.g1, "mcmp")));
    const double m100 = static_cast<double>(wall_hits(by_name(s.g100, "mcmp")));
    const double s1 = static_cast<double>(wall_hits(by_name(s.g1, "s3p")));
    const double s100 = static_cast<double>(wall_hits(by_name(s.g100, "s3p")));
    v.require(m1 > 0 && m100 <= 0.1 * m1, "mcmp wall collisions drop by 90%");
    v.require(s1 > 0 && s100 >= 0.1 * s1 && s100 <= 10 * s1, "s3p wall collisions same order");
    v.detail << "mcmp wall " << m1 << " -> " << m100 << ", s3p wall " << s1 << " -> " << s100 << ", ";
    print(7, "g = 100 table: wall penalty reshapes mcmp only", v, secs);
  }
  {
    Verdict v;
    const RobotRun& mod = by_name(s.g1, "s3p");
    const RobotRun& max = by_name(s.g1, "s3p-max");
    const double fm = mod.left_success ? static_cast<double>(mod.left) / mod.left_success : 0.0;
    const double fx = max.left_success ? static_cast<double>(max.left) / max.left_success : 0.0;
    v.require(fm > fx, "left-of-A fraction");
    v.detail << "left of A: s3p " << mod.left << "/" << mod.left_success << ", s3p-max " << max.left << "/"
             << max.left_success << ", ";
    print(8, "route shift left of obstacle A", v, secs);
  }
}

void criterion_determinism(const std::string& cli_first, const RobotSuite& first) {
  const auto t0 = Clock::now();
  Verdict v;
  std::ostringstream sink;
  const std::string cli_again = two_path_cli();
  v.require(cli_again == cli_first, "two-path transcript");
  const RobotSuite again = robot_suite(sink);
  v.require(again.transcript == first.transcript, "robot reports and stats");
  v.detail << "compared " << cli_first.size() + first.transcript.size() << " bytes, ";
  print(9, "determinism of criteria 4-8", v, seconds_since(t0));
}

void criterion_properties() {
  const auto t0 = Clock::now();
  Verdict v;
  const std::pair<const char*, std::function<properties::Outcome()>> checks[] = {
      {"belief telescoping", [] { return properties::belief_telescoping(1000, 101); }},
      {"gamma leak", [] { return properties::gamma_leak_equivalence(200, 102); }},
      {"cap invariance", [] { return properties::cap_invariance(100, 103); }},
      {"conditional transform vs Monte Carlo", [] { return properties::conditional_transform_vs_monte_carlo(100, 104); }},
  };
  for (const auto& [name, run] : checks) {
    const properties::Outcome o = run();
    v.require(o.ok() && o.cases >= 100, std::string(name) + ": " + o.first_failure);
    v.detail << name << " " << o.cases - o.failures << "/" << o.cases << ", ";
  }
  const double secs = seconds_since(t0);
  v.require(secs < 300.0, "runtime");
  print(10, "property suite", v, secs);
}

}  // namespace

int main() {
  std::cout << std::setprecision(6);
  criterion_reachability();
  criterion_constraint_approximation();
  criterion_minimax();
  std::string cli_transcript;
  criterion_two_path(cli_transcript);
  const auto t0 = Clock::now();
  std::cout << "robot experiments (g = 1 and g = 100, 10^5 episodes each, seed 0):" << std::endl;
  const RobotSuite suite = robot_suite(std::cout);
  const double robot_secs = seconds_since(t0);
  criteria_robot(suite, robot_secs);
  criterion_determinism(cli_transcript, suite);
  criterion_properties();
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
