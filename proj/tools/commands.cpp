#include "commands.hpp"

#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ccssp/baselines.hpp"
#include "ccssp/errors.hpp"
#include "ccssp/game_solver.hpp"
#include "ccssp/io.hpp"
#include "ccssp/reachability.hpp"
#include "ccssp/robot_domain.hpp"
#include "ccssp/simulator.hpp"
#include "plot.hpp"

namespace ccssp::cli {

namespace fs = std::filesystem;

namespace {

fs::path meta_path(const fs::path& model) {
  fs::path p = model;
  p.replace_extension(".meta.json");
  return p;
}

StateId pick_start(const io::ModelFile& m, int flag) {
  if (flag >= 0) {
    if (static_cast<std::size_t>(flag) >= m.mdp.num_states()) throw ConfigInvalid("--start out of range");
    return static_cast<StateId>(flag);
  }
  if (m.start) return *m.start;
  return 1;
}

struct BuildArgs {
  double g_wall = 1.0;
  std::string grid = "20,20,12";
  int samples = 16;
  int position_samples = 4;
  int heading_samples = 3;
  bool penalty_on_entry = false;
  std::string out;
};

struct AnalyzeArgs {
  std::string model;
  std::string out;
};

struct SolveArgs {
  std::string model;
  std::string kind = "mcmp";
  double epsilon = 0.05;
  double gamma = 0.999;
  double cap = 50.0;
  int start = -1;
  std::uint64_t seed = 0;
  std::string report;
  std::string policy;
  std::string dump;
};

struct SimulateArgs {
  std::string model;
  std::string policy;
  std::string meta;
  std::size_t n = 100'000;
  std::uint64_t seed = 0;
  std::size_t max_steps = 10'000;
  std::size_t traj_count = 0;
  std::string traj_dir;
  std::string label;
  std::string out;
  int start = -1;
  unsigned threads = 0;
};

struct ReportArgs {
  std::vector<std::string> stats;
  std::string out;
};

int cmd_build(const BuildArgs& a, std::ostream& out) {
  RobotConfig cfg;
  cfg.wall_cost = a.g_wall;
  cfg.noise_samples = a.samples;
  cfg.position_samples = a.position_samples;
  cfg.heading_samples = a.heading_samples;
  cfg.penalty_on_entry = a.penalty_on_entry;
  std::vector<int> dims;
  std::stringstream ss(a.grid);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      dims.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ConfigInvalid("--grid must be NX,NY,NT");
    }
  }
  if (dims.size() != 3) throw ConfigInvalid("--grid must be NX,NY,NT");
  cfg.nx = dims[0];
  cfg.ny = dims[1];
  cfg.ntheta = dims[2];
  const RobotModel m = build_robot_mdp(cfg);
  io::write_file(a.out, io::model_to_string(m.mdp, m.start));
  io::write_file(meta_path(a.out), io::robot_meta_to_string(cfg));
  out << "robot model: " << m.mdp.num_states() << " states, " << m.mdp.num_rows() << " rows, start " << m.start
      << "\nwrote " << a.out << " and " << meta_path(a.out).string() << '\n';
  return kOk;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const io::ModelFile m = io::model_from_string(io::read_file(a.model));
  const ReachAnalysis an = analyze(m.mdp);
  const std::string text = io::analysis_to_string(an);
  if (a.out.empty()) {
    out << text;
  } else {
    io::write_file(a.out, text);
    out << "dead_all: " << an.dead_all.size() << " states, attention: " << an.attention.size() << " states\n";
  }
  return kOk;
}

void print_report(const SolveReport& r, std::ostream& out) {
  out << std::setprecision(10);
  out << "method: " << r.method << "\nobjective: " << r.objective_value << "\nfeasible: " << (r.feasible ? "yes" : "no")
      << "\nmixture_failure_measure: " << r.mixture_j_cond;
  if (r.method == "s3p" || r.method == "mcmp") {
    out << "\nc_star: " << r.c_star << "\nalpha_star: " << r.alpha_star;
    if (r.method == "s3p") out << "\neps_star: " << r.eps_star;
  }
  out << "\ncomponents:";
  for (const auto& c : r.components) out << "\n  weight " << c.weight << "  j_obj " << c.j_obj << "  j_cond " << c.j_cond;
  out << '\n';
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const io::ModelFile m = io::model_from_string(io::read_file(a.model));
  const StateId x0 = pick_start(m, a.start);
  GameConfig cfg;
  cfg.gamma = a.gamma;
  cfg.epsilon = a.epsilon;
  cfg.cap = a.cap;
  cfg.validate();
  const ReachAnalysis an = analyze(m.mdp);
  SolveReport rep;
  if (a.kind == "s3p-max") {
    rep = report_s3p_max(m.mdp, an, x0, a.gamma);
  } else if (a.kind == "mcmp-max") {
    rep = report_mcmp_max(m.mdp, an, x0, a.gamma);
  } else if (a.kind == "s3p") {
    rep = solve(m.mdp, x0, Objective::s3p, cfg, an);
  } else if (a.kind == "mcmp") {
    rep = solve(m.mdp, x0, Objective::mcmp, cfg, an);
  } else {
    throw ConfigInvalid("unknown case \"" + a.kind + "\"");
  }
  if (!a.dump.empty()) {
    if (a.kind == "s3p") {
      io::write_file(a.dump, io::augmented_to_string(build_s(m.mdp, cfg.gamma, cfg.cap, an.minprob, an.p_min)));
    } else if (a.kind == "mcmp") {
      io::write_file(a.dump, io::augmented_to_string(build_m(m.mdp, cfg.gamma, an)));
    } else {
      throw ConfigInvalid("--dump-augmented applies to the s3p and mcmp cases");
    }
  }
  if (!a.report.empty()) io::write_file(a.report, io::report_to_string(rep));
  if (!a.policy.empty()) io::write_file(a.policy, io::policy_to_string(rep.policy()));
  print_report(rep, out);
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.n == 0) throw ConfigInvalid("--n must be at least 1");
  const io::ModelFile m = io::model_from_string(io::read_file(a.model));
  const Policy policy = io::policy_from_string(io::read_file(a.policy));
  check_policy(m.mdp, policy);
  const fs::path meta = a.meta.empty() ? meta_path(a.model) : fs::path(a.meta);
  std::optional<RobotConfig> robot;
  if (!a.meta.empty() || fs::exists(meta)) robot = io::robot_meta_from_string(io::read_file(meta));

  std::unique_ptr<Environment> env;
  if (robot) {
    env = std::make_unique<RobotEnvironment>(m.mdp, *robot);
  } else {
    const ReachAnalysis an = analyze(m.mdp);
    env = std::make_unique<MdpEnvironment>(m.mdp, pick_start(m, a.start), an.is_dead);
  }
  MonteCarloOptions mo;
  mo.max_steps = a.max_steps;
  mo.threads = a.threads;
  const EpisodeStats st = monte_carlo(*env, policy, a.n, a.seed, mo);
  const std::string label = a.label.empty() ? fs::path(a.policy).stem().string() : a.label;
  const std::string text = io::stats_to_string(st, label);
  if (!a.out.empty()) io::write_file(a.out, text);

  if (a.traj_count > 0) {
    const fs::path dir = a.traj_dir.empty() ? fs::path(".") : fs::path(a.traj_dir);
    std::vector<Trajectory> batch;
    EpisodeOptions eo;
    eo.max_steps = a.max_steps;
    std::size_t left = 0, success = 0;
    for (std::size_t i = 0; i < a.traj_count; ++i) {
      Trajectory t = run_episode(*env, policy, episode_seed(a.seed, i), eo);
      std::ostringstream name;
      name << label << "_traj_" << std::setw(3) << std::setfill('0') << i << ".csv";
      io::write_file(dir / name.str(), trajectory_csv(t));
      if (robot && t.outcome == EpisodeOutcome::success) {
        ++success;
        if (passes_left_of_a(*robot, t.positions)) ++left;
      }
      batch.push_back(std::move(t));
    }
    if (robot) {
      io::write_file(dir / (label + "_trajectories.svg"), render_svg(*robot, batch, label));
      out << "successful trajectories left of obstacle A: " << left << " / " << success << '\n';
    }
  }
  out << text;
  return kOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::ostringstream t;
  t << std::fixed << std::setprecision(3);
  t << "| policy | episodes | success | cond. cost on success | obstacle collisions | wall collisions | truncated |\n";
  t << "|---|---|---|---|---|---|---|\n";
  for (const std::string& f : a.stats) {
    const auto [st, label] = io::stats_from_string(io::read_file(f));
    std::size_t obstacle = 0, wall = 0, other = 0;
    for (const auto& [cls, count] : st.failure_counts) {
      if (cls == "wall") {
        wall += count;
      } else if (cls.rfind("obstacle", 0) == 0) {
        obstacle += count;
      } else {
        other += count;
      }
    }
    t << "| " << (label.empty() ? f : label) << " | " << st.n_episodes << " | " << st.n_success << " | ";
    if (st.n_success > 0) {
      t << st.cond_mean_cost;
    } else {
      t << "n/a";
    }
    t << " | " << obstacle + other << " | " << wall << " | " << st.n_truncated << " |\n";
  }
  if (!a.out.empty()) io::write_file(a.out, t.str());
  out << t.str();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chance-constrained stochastic shortest path planner"};
  app.require_subcommand(1);

  BuildArgs build;
  CLI::App* domain = app.add_subcommand("domain", "Build benchmark domains");
  domain->require_subcommand(1);
  CLI::App* robot = domain->add_subcommand("build-robot", "Discretize the mobile-robot domain");
  robot->add_option("--g-wall", build.g_wall, "Per-step cost after a wall collision")->capture_default_str();
  robot->add_option("--grid", build.grid, "NX,NY,NT")->capture_default_str();
  robot->add_option("--noise-samples", build.samples, "Quadrature samples of the heading noise")->capture_default_str();
  robot->add_option("--position-samples", build.position_samples, "Midpoint samples per axis inside a cell")
      ->capture_default_str();
  robot->add_option("--heading-samples", build.heading_samples, "Midpoint samples inside a heading sector")
      ->capture_default_str();
  robot->add_flag("--penalty-on-entry", build.penalty_on_entry, "Charge the collision penalty on the colliding step");
  robot->add_option("--out", build.out, "Model file")->required();

  AnalyzeArgs an;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Dead-end and attention sets, reach probabilities");
  analyze_cmd->add_option("model", an.model)->required();
  analyze_cmd->add_option("--out", an.out, "Analysis file (stdout if omitted)");

  SolveArgs so;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Compute a policy");
  solve_cmd->add_option("model", so.model)->required();
  solve_cmd->add_option("--case", so.kind, "s3p-max | mcmp-max | s3p | mcmp")
      ->check(CLI::IsMember({"s3p-max", "mcmp-max", "s3p", "mcmp"}))
      ->capture_default_str();
  solve_cmd->add_option("--epsilon", so.epsilon)->capture_default_str();
  solve_cmd->add_option("--gamma", so.gamma)->capture_default_str();
  solve_cmd->add_option("--cap", so.cap, "Cost cap for the conditional-cost case")->capture_default_str();
  solve_cmd->add_option("--start", so.start, "Start state (default: model's start, else 1)");
  solve_cmd->add_option("--seed", so.seed, "Accepted for symmetry; solving is deterministic")->capture_default_str();
  solve_cmd->add_option("--report", so.report, "Report file");
  solve_cmd->add_option("--policy-out", so.policy, "Policy file");
  solve_cmd->add_option("--dump-augmented", so.dump, "Write the augmented model (s3p, mcmp)");

  SimulateArgs si;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo evaluation of a policy");
  sim->add_option("model", si.model)->required();
  sim->add_option("policy", si.policy)->required();
  sim->add_option("--meta", si.meta, "Robot metadata (default: <model>.meta.json if present)");
  sim->add_option("--n", si.n)->capture_default_str();
  sim->add_option("--seed", si.seed)->capture_default_str();
  sim->add_option("--max-steps", si.max_steps)->capture_default_str();
  sim->add_option("--traj-count", si.traj_count, "Trajectories to log")->capture_default_str();
  sim->add_option("--traj-dir", si.traj_dir);
  sim->add_option("--label", si.label);
  sim->add_option("--start", si.start);
  sim->add_option("--threads", si.threads)->capture_default_str();
  sim->add_option("--out", si.out, "Stats file");

  ReportArgs re;
  CLI::App* report = app.add_subcommand("report", "Comparison table from stats files");
  report->add_option("stats", re.stats)->required();
  report->add_option("--out", re.out);

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (robot->parsed()) return cmd_build(build, out);
    if (analyze_cmd->parsed()) return cmd_analyze(an, out);
    if (solve_cmd->parsed()) return cmd_solve(so, out);
    if (sim->parsed()) return cmd_simulate(si, out);
    if (report->parsed()) return cmd_report(re, out);
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kInputError;
}

}  // namespace ccssp::cli
