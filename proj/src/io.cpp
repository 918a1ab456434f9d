#include "ccssp/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ccssp/errors.hpp"

namespace ccssp::io {

using nlohmann::json;

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
}

void check_header(const json& j, const char* kind) {
  if (!j.is_object()) throw ParseError("top-level value must be an object");
  if (!j.contains("format_version") || j["format_version"] != kFormatVersion) {
    throw ParseError("unsupported or missing format_version");
  }
  if (kind != nullptr && (!j.contains("kind") || j["kind"] != kind)) {
    throw ParseError(std::string("expected kind \"") + kind + "\"");
  }
}

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field \"") + key + "\": " + e.what());
  }
}

// JSON has no infinity; non-finite numbers are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json stationary_json(const StationaryPolicy& p) {
  json j{{"kind", "stationary"}};
  if (p.is_deterministic()) {
    j["actions"] = p.actions();
  } else {
    j["distributions"] = p.distributions();
  }
  return j;
}

StationaryPolicy stationary_from(const json& j) {
  if (j.contains("actions")) return StationaryPolicy::deterministic(get<std::vector<ActionId>>(j, "actions"));
  return StationaryPolicy::randomized(get<std::vector<std::vector<double>>>(j, "distributions"));
}

json component_json(const ComponentPolicy& c) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StationaryPolicy>) {
          return stationary_json(p);
        } else if constexpr (std::is_same_v<T, CostAugmentedPolicy>) {
          return json{{"kind", "cost_augmented"},
                      {"base_states", p.base_states},
                      {"delta", p.grid.delta()},
                      {"cap", p.grid.cap()},
                      {"levels", p.grid.units()},
                      {"table", p.table},
                      {"fallback", stationary_json(p.fallback)}};
        } else {
          return json{{"kind", "labeled"}, {"base_states", p.base_states}, {"table", p.table}};
        }
      },
      c);
}

ComponentPolicy component_from(const json& j) {
  const std::string kind = get<std::string>(j, "kind");
  if (kind == "stationary") return stationary_from(j);
  if (kind == "cost_augmented") {
    CostAugmentedPolicy p;
    p.base_states = get<std::size_t>(j, "base_states");
    p.grid = CostLevelGrid(get<double>(j, "delta"), get<double>(j, "cap"), get<std::vector<std::int64_t>>(j, "levels"));
    p.table = get<std::vector<ActionId>>(j, "table");
    if (!j.contains("fallback")) throw ParseError("missing field \"fallback\"");
    p.fallback = stationary_from(j["fallback"]);
    if (p.base_states == 0 || p.table.size() != (p.base_states - 1) * p.grid.size()) {
      throw ParseError("cost-augmented table size does not match base_states x levels");
    }
    return p;
  }
  if (kind == "labeled") {
    LabeledPolicy p;
    p.base_states = get<std::size_t>(j, "base_states");
    p.table = get<std::vector<std::int64_t>>(j, "table");
    if (p.table.size() != 2 * p.base_states + 1) throw ParseError("labeled table size must be 2n+1");
    return p;
  }
  throw ParseError("unknown policy kind \"" + kind + "\"");
}

}  // namespace

std::string model_to_string(const Mdp& mdp, std::optional<StateId> start) {
  json states = json::array();
  for (std::size_t x = 0; x < mdp.num_states(); ++x) {
    json actions = json::array();
    for (std::size_t u = 0; u < mdp.num_actions(static_cast<StateId>(x)); ++u) {
      json outs = json::array();
      for (const Outcome& o : mdp.outcomes(static_cast<StateId>(x), static_cast<ActionId>(u))) {
        outs.push_back(json::array({o.prob, o.next, o.cost}));
      }
      actions.push_back(std::move(outs));
    }
    states.push_back(std::move(actions));
  }
  json j{{"format_version", kFormatVersion}, {"kind", "mdp"}, {"cost_resolution", mdp.cost_resolution()}};
  if (start) j["start"] = *start;
  j["states"] = std::move(states);
  return j.dump(1) + "\n";
}

ModelFile model_from_string(const std::string& text) {
  const json j = parse(text);
  check_header(j, "mdp");
  const double delta = get<double>(j, "cost_resolution");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParseError("cost_resolution must be positive");
  if (!j.contains("states") || !j["states"].is_array() || j["states"].empty()) {
    throw ParseError("\"states\" must be a non-empty array");
  }
  const json& states = j["states"];
  const std::size_t n = states.size();
  MdpBuilder b(n, delta);
  for (std::size_t x = 0; x < n; ++x) {
    const std::string where = "state " + std::to_string(x);
    if (!states[x].is_array()) throw ParseError(where + ": actions must be an array");
    for (std::size_t u = 0; u < states[x].size(); ++u) {
      const std::string at = where + " action " + std::to_string(u);
      const json& row = states[x][u];
      if (!row.is_array() || row.empty()) throw ParseError(at + ": outcomes must be a non-empty array");
      std::vector<Outcome> outs;
      for (const json& o : row) {
        if (!o.is_array() || o.size() != 3 || !o[0].is_number() || !o[1].is_number_integer() || !o[2].is_number()) {
          throw ParseError(at + ": each outcome must be [probability, next_state, cost]");
        }
        outs.push_back({o[0].get<double>(), o[1].get<StateId>(), o[2].get<double>()});
      }
      b.add_action(static_cast<StateId>(x), std::move(outs));
    }
  }
  ModelFile out;
  out.mdp = std::move(b).build();
  const std::vector<std::string> problems = validate_mdp(out.mdp);
  if (!problems.empty()) {
    std::string msg = problems.front();
    if (problems.size() > 1) msg += " (and " + std::to_string(problems.size() - 1) + " more)";
    throw ParseError(msg);
  }
  if (j.contains("start")) {
    const StateId s = get<StateId>(j, "start");
    if (s < 0 || static_cast<std::size_t>(s) >= n) throw ParseError("start state out of range");
    out.start = s;
  }
  return out;
}

std::string policy_to_string(const Policy& policy) {
  json j = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MixedPolicy>) {
          json comps = json::array();
          for (const auto& c : p.components) comps.push_back({{"weight", c.weight}, {"policy", component_json(c.policy)}});
          return json{{"kind", "mixed"}, {"components", std::move(comps)}};
        } else {
          return component_json(ComponentPolicy(p));
        }
      },
      policy);
  j["format_version"] = kFormatVersion;
  return j.dump() + "\n";
}

Policy policy_from_string(const std::string& text) {
  const json j = parse(text);
  check_header(j, nullptr);
  const std::string kind = get<std::string>(j, "kind");
  if (kind == "mixed") {
    MixedPolicy m;
    if (!j.contains("components") || !j["components"].is_array()) throw ParseError("missing field \"components\"");
    for (const json& c : j["components"]) {
      if (!c.contains("policy")) throw ParseError("mixture component without policy");
      m.components.push_back({get<double>(c, "weight"), component_from(c["policy"])});
    }
    return m;
  }
  return std::visit([](auto&& p) -> Policy { return std::move(p); }, component_from(j));
}

std::string analysis_to_string(const ReachAnalysis& a) {
  json stay = json::array();
  for (StateId x : a.attention) stay.push_back({x, a.stay_action[x]});
  const json j{{"format_version", kFormatVersion},
               {"kind", "analysis"},
               {"dead_all", a.dead_all},
               {"attention", a.attention},
               {"stay_action", stay},
               {"p_max", a.p_max},
               {"p_min", a.p_min}};
  return j.dump(1) + "\n";
}

std::string report_to_string(const SolveReport& r) {
  json comps = json::array();
  for (const auto& c : r.components) {
    const char* kind = std::visit(
        [](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, StationaryPolicy>) return "stationary";
          else if constexpr (std::is_same_v<T, CostAugmentedPolicy>) return "cost_augmented";
          else return "labeled";
        },
        c.policy);
    comps.push_back({{"weight", c.weight},
                     {"policy_kind", kind},
                     {"alpha_hat", c.alpha_hat},
                     {"j_obj", number(c.j_obj)},
                     {"j_cond", number(c.j_cond)},
                     {"j_s3p", number(c.j_s3p)}});
  }
  json sweep = json::array();
  for (const auto& [e, c] : r.eps_sweep) sweep.push_back({number(e), number(c)});
  const json j{{"format_version", kFormatVersion},
               {"kind", "report"},
               {"method", r.method},
               {"objective", to_string(r.objective)},
               {"start", r.start},
               {"gamma", r.gamma},
               {"epsilon", r.epsilon},
               {"cap", r.cap},
               {"c_star", number(r.c_star)},
               {"eps_star", number(r.eps_star)},
               {"alpha_star", number(r.alpha_star)},
               {"minimax_value", number(r.minimax_value)},
               {"min_failure_measure", number(r.min_failure_measure)},
               {"objective_value", number(r.objective_value)},
               {"mixture_j_obj", number(r.mixture_j_obj)},
               {"mixture_j_cond", number(r.mixture_j_cond)},
               {"feasible", r.feasible},
               {"components", std::move(comps)},
               {"eps_sweep", std::move(sweep)}};
  return j.dump(1) + "\n";
}

std::string stats_to_string(const EpisodeStats& s, const std::string& label) {
  json j{{"format_version", kFormatVersion},
         {"kind", "stats"},
         {"label", label},
         {"n_episodes", s.n_episodes},
         {"n_success", s.n_success},
         {"n_truncated", s.n_truncated},
         {"failure_counts", s.failure_counts},
         {"mean_steps", s.mean_steps},
         {"seed", s.seed}};
  if (s.n_success > 0) {
    j["cond_mean_cost"] = s.cond_mean_cost;
    j["cond_cost_stddev"] = s.cond_cost_stddev;
  } else {
    j["cond_mean_cost"] = nullptr;
    j["cond_cost_stddev"] = nullptr;
  }
  return j.dump(1) + "\n";
}

std::pair<EpisodeStats, std::string> stats_from_string(const std::string& text) {
  const json j = parse(text);
  check_header(j, "stats");
  EpisodeStats s;
  s.n_episodes = get<std::size_t>(j, "n_episodes");
  s.n_success = get<std::size_t>(j, "n_success");
  s.n_truncated = get<std::size_t>(j, "n_truncated");
  s.failure_counts = get<std::map<std::string, std::size_t>>(j, "failure_counts");
  s.mean_steps = get<double>(j, "mean_steps");
  s.seed = get<std::uint64_t>(j, "seed");
  if (s.n_success > 0) {
    s.cond_mean_cost = get<double>(j, "cond_mean_cost");
    s.cond_cost_stddev = get<double>(j, "cond_cost_stddev");
  }
  if (s.n_success + s.n_truncated + s.failures() != s.n_episodes) throw ParseError("episode counts do not add up");
  return {s, j.value("label", std::string())};
}

namespace {

json rect_json(const Rect& r) { return json::array({r.x0, r.x1, r.y0, r.y1}); }

Rect rect_from(const json& j, const char* key) {
  const auto v = get<std::vector<double>>(j, key);
  if (v.size() != 4) throw ParseError(std::string("\"") + key + "\" must be [x0, x1, y0, y1]");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

std::string robot_meta_to_string(const RobotConfig& c) {
  const RobotGrid grid(c);
  json cells = json::array();
  for (StateId s = RobotGrid::kFirstCell; static_cast<std::size_t>(s) < grid.num_states(); ++s) {
    const auto [ix, iy, it] = grid.cell_of(s);
    cells.push_back({s, ix, iy, it, grid.sector_heading(it)});
  }
  const json j{{"format_version", kFormatVersion},
               {"kind", "robot_meta"},
               {"obstacle_a", rect_json(c.obstacle_a)},
               {"obstacle_b", rect_json(c.obstacle_b)},
               {"goal", rect_json(c.goal)},
               {"init_region", rect_json(c.init_region)},
               {"init_heading_halfwidth", c.init_heading_halfwidth},
               {"start", {c.start.x, c.start.y}},
               {"speed", c.speed},
               {"dt", c.dt},
               {"dthetas", c.dthetas},
               {"noise_halfwidth", c.noise_halfwidth},
               {"grid", {c.nx, c.ny, c.ntheta}},
               {"noise_samples", c.noise_samples},
               {"position_samples", c.position_samples},
               {"heading_samples", c.heading_samples},
               {"wall_cost", c.wall_cost},
               {"obstacle_cost", c.obstacle_cost},
               {"step_cost", c.step_cost},
               {"penalty_on_entry", c.penalty_on_entry},
               {"special_states", {{"goal", 0}, {"collision_a", 1}, {"collision_b", 2}, {"wall", 3}}},
               {"cells_columns", {"state", "ix", "iy", "itheta", "heading"}},
               {"cells", std::move(cells)}};
  return j.dump() + "\n";
}

RobotConfig robot_meta_from_string(const std::string& text) {
  const json j = parse(text);
  check_header(j, "robot_meta");
  RobotConfig c;
  c.obstacle_a = rect_from(j, "obstacle_a");
  c.obstacle_b = rect_from(j, "obstacle_b");
  c.goal = rect_from(j, "goal");
  c.init_region = rect_from(j, "init_region");
  c.init_heading_halfwidth = get<double>(j, "init_heading_halfwidth");
  const auto st = get<std::vector<double>>(j, "start");
  if (st.size() != 2) throw ParseError("\"start\" must be [x, y]");
  c.start = {st[0], st[1]};
  c.speed = get<double>(j, "speed");
  c.dt = get<double>(j, "dt");
  c.dthetas = get<std::vector<double>>(j, "dthetas");
  c.noise_halfwidth = get<double>(j, "noise_halfwidth");
  const auto g = get<std::vector<int>>(j, "grid");
  if (g.size() != 3) throw ParseError("\"grid\" must be [nx, ny, ntheta]");
  c.nx = g[0];
  c.ny = g[1];
  c.ntheta = g[2];
  c.noise_samples = get<int>(j, "noise_samples");
  c.position_samples = get<int>(j, "position_samples");
  c.heading_samples = get<int>(j, "heading_samples");
  c.wall_cost = get<double>(j, "wall_cost");
  c.obstacle_cost = get<double>(j, "obstacle_cost");
  c.step_cost = get<double>(j, "step_cost");
  c.penalty_on_entry = get<bool>(j, "penalty_on_entry");
  try {
    c.validate();
  } catch (const ConfigInvalid& e) {
    throw ParseError(std::string("robot metadata: ") + e.what());
  }
  return c;
}

namespace {

json cost_model_states(const CostModel& m) {
  json states = json::array();
  for (std::size_t xi = 0; xi < m.num_states(); ++xi) {
    const auto x = static_cast<StateId>(xi);
    json rows = json::array();
    for (std::size_t r = m.first_row(x); r < m.end_row(x); ++r) {
      json succ = json::array();
      const auto w = m.weights(r);
      const auto to = m.successors(r);
      for (std::size_t k = 0; k < w.size(); ++k) succ.push_back({w[k], to[k]});
      rows.push_back({{"obj", m.obj(r)}, {"cond", m.cond(r)}, {"tag", m.tag(r)}, {"successors", std::move(succ)}});
    }
    states.push_back(std::move(rows));
  }
  return states;
}

}  // namespace

std::string augmented_to_string(const AugmentedS& aug) {
  json index = json::array();
  for (std::size_t s = 0; s < aug.model.num_states(); ++s) {
    const auto id = static_cast<StateId>(s);
    index.push_back({aug.base_state(id), aug.grid.level(aug.level_of(id))});
  }
  const json j{{"format_version", kFormatVersion},
               {"kind", "augmented_cost_level"},
               {"gamma", aug.gamma},
               {"cost_resolution", aug.grid.delta()},
               {"cap", aug.grid.cap()},
               {"index", std::move(index)},
               {"states", cost_model_states(aug.model)}};
  return j.dump(1) + "\n";
}

std::string augmented_to_string(const AugmentedM& aug) {
  json index = json::array();
  for (std::size_t x = 0; x < aug.base_states; ++x) index.push_back({x, "s"});
  for (std::size_t x = 0; x < aug.base_states; ++x) index.push_back({x, "f"});
  index.push_back({nullptr, "*"});
  const json j{{"format_version", kFormatVersion},
               {"kind", "augmented_label"},
               {"gamma", aug.gamma},
               {"index", std::move(index)},
               {"states", cost_model_states(aug.model)}};
  return j.dump(1) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace ccssp::io
