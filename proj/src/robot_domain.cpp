#include "ccssp/robot_domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "ccssp/errors.hpp"

namespace ccssp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool inside_unit(const Rect& r) { return r.x0 >= 0.0 && r.x1 <= 1.0 && r.y0 >= 0.0 && r.y1 <= 1.0 && r.x0 < r.x1 && r.y0 < r.y1; }

bool integral_cost(double c) { return std::isfinite(c) && c >= 0.0 && c == std::round(c); }

// Liang-Barsky clip of p + t d, t in [0, 1], against a closed box; entry
// parameter or nullopt.
std::optional<double> segment_entry(Point p, Point d, const Rect& r) {
  const double pk[4] = {-d.x, d.x, -d.y, d.y};
  const double qk[4] = {p.x - r.x0, r.x1 - p.x, p.y - r.y0, r.y1 - p.y};
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < 4; ++k) {
    if (pk[k] == 0.0) {
      if (qk[k] < 0.0) return std::nullopt;
      continue;
    }
    const double t = qk[k] / pk[k];
    if (pk[k] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

// First parameter at which the segment leaves the unit square.
std::optional<double> wall_exit(Point p, Point d) {
  const Point e{p.x + d.x, p.y + d.y};
  if (e.x >= 0.0 && e.x <= 1.0 && e.y >= 0.0 && e.y <= 1.0) return std::nullopt;
  double t = 1.0;
  if (d.x > 0.0 && e.x > 1.0) t = std::min(t, (1.0 - p.x) / d.x);
  if (d.x < 0.0 && e.x < 0.0) t = std::min(t, (0.0 - p.x) / d.x);
  if (d.y > 0.0 && e.y > 1.0) t = std::min(t, (1.0 - p.y) / d.y);
  if (d.y < 0.0 && e.y < 0.0) t = std::min(t, (0.0 - p.y) / d.y);
  return std::max(0.0, t);
}

}  // namespace

void RobotConfig::validate() const {
  for (const Rect* r : {&obstacle_a, &obstacle_b, &goal, &init_region}) {
    if (!inside_unit(*r)) throw ConfigInvalid("region outside the unit workspace or empty");
  }
  if (nx < 2 || ny < 2 || ntheta < 2) throw ConfigInvalid("grid sizes must be at least 2");
  if (noise_samples < 1 || position_samples < 1 || heading_samples < 1) {
    throw ConfigInvalid("quadrature sample counts must be at least 1");
  }
  if (dthetas.empty()) throw ConfigInvalid("no steering actions");
  if (!(speed > 0.0) || !(dt > 0.0)) throw ConfigInvalid("speed and time step must be positive");
  if (!(noise_halfwidth >= 0.0) || !(init_heading_halfwidth >= 0.0)) throw ConfigInvalid("negative noise width");
  if (!integral_cost(step_cost) || step_cost <= 0.0 || !integral_cost(wall_cost) || !integral_cost(obstacle_cost)) {
    throw ConfigInvalid("robot costs must be non-negative integers with a positive step cost");
  }
  if (!init_region.contains(start.x, start.y)) throw ConfigInvalid("start position outside the initial region");
}

double wrap_angle(double a) {
  double w = std::fmod(a + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w - std::numbers::pi;
}

ContinuousStep continuous_step(const RobotConfig& cfg, Point pos, double heading, double dtheta, double xi) {
  ContinuousStep out;
  out.heading = wrap_angle(heading + dtheta + xi);
  const double len = cfg.speed * cfg.dt;
  const Point d{len * std::cos(out.heading), len * std::sin(out.heading)};
  out.pos = {pos.x + d.x, pos.y + d.y};

  double best = 2.0;
  auto consider = [&](std::optional<double> t, RobotEvent e) {
    if (t && *t < best) {
      best = *t;
      out.event = e;
    }
  };
  consider(segment_entry(pos, d, cfg.obstacle_a), RobotEvent::collision_a);
  consider(segment_entry(pos, d, cfg.obstacle_b), RobotEvent::collision_b);
  consider(wall_exit(pos, d), RobotEvent::wall);
  if (best <= 1.0) {
    out.contact = {pos.x + best * d.x, pos.y + best * d.y};
    return out;
  }
  if (cfg.goal.contains(out.pos.x, out.pos.y)) out.event = RobotEvent::goal;
  return out;
}

RobotGrid::RobotGrid(const RobotConfig& cfg) : nx_(cfg.nx), ny_(cfg.ny), nt_(cfg.ntheta) {}

std::size_t RobotGrid::num_states() const {
  return static_cast<std::size_t>(kFirstCell) + static_cast<std::size_t>(nx_) * ny_ * nt_;
}

StateId RobotGrid::state(int ix, int iy, int it) const { return kFirstCell + (ix * ny_ + iy) * nt_ + it; }

StateId RobotGrid::locate(Point p, double heading) const {
  const int ix = std::clamp(static_cast<int>(std::floor(p.x * nx_)), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor(p.y * ny_)), 0, ny_ - 1);
  return state(ix, iy, sector_of(heading));
}

std::array<int, 3> RobotGrid::cell_of(StateId s) const {
  const int k = s - kFirstCell;
  return {k / (ny_ * nt_), (k / nt_) % ny_, k % nt_};
}

Rect RobotGrid::cell_box(StateId s) const {
  const auto [ix, iy, it] = cell_of(s);
  (void)it;
  return {static_cast<double>(ix) / nx_, static_cast<double>(ix + 1) / nx_, static_cast<double>(iy) / ny_,
          static_cast<double>(iy + 1) / ny_};
}

Point RobotGrid::cell_center(StateId s) const {
  const Rect b = cell_box(s);
  return {0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)};
}

double RobotGrid::sector_heading(int it) const { return wrap_angle(kTwoPi * it / nt_); }

int RobotGrid::sector_of(double heading) const {
  const double w = kTwoPi / nt_;
  const long k = std::lround(wrap_angle(heading) / w);
  return static_cast<int>(((k % nt_) + nt_) % nt_);
}

RobotModel build_robot_mdp(const RobotConfig& cfg) {
  cfg.validate();
  const RobotGrid grid(cfg);
  const std::size_t n = grid.num_states();
  MdpBuilder b(n, 1.0);
  b.add_action(RobotGrid::kGoal, {{1.0, RobotGrid::kGoal, 0.0}});
  b.add_action(RobotGrid::kCollisionA, {{1.0, RobotGrid::kCollisionA, cfg.obstacle_cost}});
  b.add_action(RobotGrid::kCollisionB, {{1.0, RobotGrid::kCollisionB, cfg.obstacle_cost}});
  b.add_action(RobotGrid::kWall, {{1.0, RobotGrid::kWall, cfg.wall_cost}});

  const auto midpoints = [](int count, double lo, double hi) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) v[j] = lo + (j + 0.5) * (hi - lo) / count;
    return v;
  };
  const std::vector<double> xis = midpoints(cfg.noise_samples, -cfg.noise_halfwidth, cfg.noise_halfwidth);
  const double sector = 2.0 * std::numbers::pi / cfg.ntheta;
  const std::vector<double> offsets = midpoints(cfg.heading_samples, -0.5 * sector, 0.5 * sector);
  const int total = cfg.position_samples * cfg.position_samples * cfg.heading_samples * cfg.noise_samples;
  const double p = 1.0 / total;

  for (int ix = 0; ix < cfg.nx; ++ix) {
    for (int iy = 0; iy < cfg.ny; ++iy) {
      for (int it = 0; it < cfg.ntheta; ++it) {
        const StateId s = grid.state(ix, iy, it);
        const Rect box = grid.cell_box(s);
        const std::vector<double> xs = midpoints(cfg.position_samples, box.x0, box.x1);
        const std::vector<double> ys = midpoints(cfg.position_samples, box.y0, box.y1);
        const double h = grid.sector_heading(it);
        for (double dth : cfg.dthetas) {
          // (next, cost) -> sample count
          std::map<std::pair<StateId, double>, int> agg;
          for (double px : xs) {
            for (double py : ys) {
              for (double off : offsets) {
                for (double xi : xis) {
                  const ContinuousStep st = continuous_step(cfg, {px, py}, h + off, dth, xi);
                  StateId next = 0;
                  double cost = cfg.step_cost;
                  switch (st.event) {
                    case RobotEvent::moved: next = grid.locate(st.pos, st.heading); break;
                    case RobotEvent::goal: next = RobotGrid::kGoal; break;
                    case RobotEvent::collision_a:
                      next = RobotGrid::kCollisionA;
                      if (cfg.penalty_on_entry) cost = cfg.obstacle_cost;
                      break;
                    case RobotEvent::collision_b:
                      next = RobotGrid::kCollisionB;
                      if (cfg.penalty_on_entry) cost = cfg.obstacle_cost;
                      break;
                    case RobotEvent::wall:
                      next = RobotGrid::kWall;
                      if (cfg.penalty_on_entry) cost = cfg.wall_cost;
                      break;
                  }
                  ++agg[{next, cost}];
                }
              }
            }
          }
          std::vector<Outcome> outs;
          outs.reserve(agg.size());
          for (const auto& [key, count] : agg) outs.push_back({count * p, key.first, key.second});
          b.add_action(s, std::move(outs));
        }
      }
    }
  }
  RobotModel m;
  m.mdp = std::move(b).build();
  m.config = cfg;
  m.start = grid.locate(cfg.start, 0.0);
  return m;
}

RobotEnvironment::RobotEnvironment(const Mdp& mdp, RobotConfig cfg) : mdp_(&mdp), cfg_(std::move(cfg)), grid_(cfg_) {
  cfg_.validate();
  if (mdp.num_states() != grid_.num_states()) throw PolicyModelMismatch("robot model does not match its grid metadata");
}

StepResult RobotEnvironment::reset(std::mt19937_64& rng) {
  const Rect& r = cfg_.init_region;
  pos_.x = r.x0 + (r.x1 - r.x0) * u01(rng);
  pos_.y = r.y0 + (r.y1 - r.y0) * u01(rng);
  heading_ = wrap_angle(-cfg_.init_heading_halfwidth + 2.0 * cfg_.init_heading_halfwidth * u01(rng));
  StepResult s;
  s.state = grid_.locate(pos_, heading_);
  if (cfg_.goal.contains(pos_.x, pos_.y)) {
    s.state = RobotGrid::kGoal;
    s.status = EpisodeOutcome::success;
  }
  return s;
}

StepResult RobotEnvironment::step(ActionId u, std::mt19937_64& rng) {
  if (u < 0 || static_cast<std::size_t>(u) >= cfg_.dthetas.size()) {
    throw PolicyModelMismatch("steering action " + std::to_string(u) + " out of range");
  }
  const double xi = -cfg_.noise_halfwidth + 2.0 * cfg_.noise_halfwidth * u01(rng);
  const ContinuousStep st = continuous_step(cfg_, pos_, heading_, cfg_.dthetas[static_cast<std::size_t>(u)], xi);
  StepResult s;
  s.cost = cfg_.step_cost;
  heading_ = st.heading;
  switch (st.event) {
    case RobotEvent::moved:
      pos_ = st.pos;
      s.state = grid_.locate(pos_, heading_);
      break;
    case RobotEvent::goal:
      pos_ = st.pos;
      s.state = RobotGrid::kGoal;
      s.status = EpisodeOutcome::success;
      break;
    case RobotEvent::collision_a:
    case RobotEvent::collision_b:
    case RobotEvent::wall: {
      pos_ = st.contact;
      s.status = EpisodeOutcome::failure;
      const int cls = st.event == RobotEvent::collision_a ? 0 : st.event == RobotEvent::collision_b ? 1 : 2;
      s.failure_class = cls;
      s.state = static_cast<StateId>(RobotGrid::kCollisionA + cls);
      break;
    }
  }
  return s;
}

bool passes_left_of_a(const RobotConfig& cfg, const std::vector<Point>& path) {
  const double y = 0.5 * (cfg.obstacle_a.y0 + cfg.obstacle_a.y1);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Point a = path[i - 1], b = path[i];
    if ((a.y < y) == (b.y < y)) continue;
    const double t = (y - a.y) / (b.y - a.y);
    return a.x + t * (b.x - a.x) < cfg.obstacle_a.x0;
  }
  return false;
}

}  // namespace ccssp
