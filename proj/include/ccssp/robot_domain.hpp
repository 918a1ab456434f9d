#pragma once

#include <array>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "ccssp/mdp.hpp"
#include "ccssp/simulator.hpp"

namespace ccssp {

struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct RobotConfig {
  Rect obstacle_a{0.15, 0.7, 0.3, 0.4};
  Rect obstacle_b{0.4, 1.0, 0.65, 0.75};
  Rect goal{0.75, 0.9, 0.8, 0.95};
  Rect init_region{0.1, 0.15, 0.1, 0.15};
  double init_heading_halfwidth = std::numbers::pi / 12;
  Point start{0.125, 0.125};
  double speed = 1.0;
  double dt = 0.1;
  std::vector<double> dthetas{-std::numbers::pi / 3, -std::numbers::pi / 6, 0.0, std::numbers::pi / 6,
                              std::numbers::pi / 3};
  double noise_halfwidth = std::numbers::pi / 12;
  int nx = 20, ny = 20, ntheta = 12;
  int noise_samples = 16;
  /// Stratified midpoints per axis inside a cell, and per heading sector.
  /// With 1 and 1 each cell is represented by its center and sector midpoint.
  int position_samples = 4;
  int heading_samples = 3;
  double wall_cost = 1.0;
  double obstacle_cost = 1.0;
  double step_cost = 1.0;
  /// Charge the collision penalty on the colliding step instead of from the
  /// first step after it.
  bool penalty_on_entry = false;

  /// Throws ConfigInvalid.
  void validate() const;
  friend bool operator==(const RobotConfig&, const RobotConfig&) = default;
};

enum class RobotEvent { moved, goal, collision_a, collision_b, wall };

struct ContinuousStep {
  Point pos;
  double heading = 0.0;
  RobotEvent event = RobotEvent::moved;
  Point contact;  // first intersection point for collisions
};

/// Wraps an angle to [-pi, pi).
double wrap_angle(double a);

/// One step of the continuous kinematics. Collisions are tested on the swept
/// segment (earliest hit wins); the goal only at the endpoint.
ContinuousStep continuous_step(const RobotConfig& cfg, Point pos, double heading, double dtheta, double xi);

/// State layout of the discretized model.
class RobotGrid {
 public:
  static constexpr StateId kGoal = 0;
  static constexpr StateId kCollisionA = 1;
  static constexpr StateId kCollisionB = 2;
  static constexpr StateId kWall = 3;
  static constexpr StateId kFirstCell = 4;

  explicit RobotGrid(const RobotConfig& cfg);
  std::size_t num_states() const;
  StateId state(int ix, int iy, int it) const;
  /// Cell and heading sector containing a continuous pose.
  StateId locate(Point p, double heading) const;
  bool is_cell(StateId s) const { return s >= kFirstCell; }
  std::array<int, 3> cell_of(StateId s) const;
  Rect cell_box(StateId s) const;
  Point cell_center(StateId s) const;
  /// Sectors are centered on multiples of 2 pi / ntheta.
  double sector_heading(int it) const;
  int sector_of(double heading) const;

 private:
  int nx_, ny_, nt_;
};

struct RobotModel {
  Mdp mdp;
  RobotConfig config;
  StateId start = 0;
};

/// Transition rows average the continuous step over equal-weight midpoint
/// samples of position within the cell, heading within the sector and the
/// heading noise.
RobotModel build_robot_mdp(const RobotConfig& cfg);

/// Continuous-state simulation. Policies act on the cell containing the
/// current pose; collisions end the episode with class A, B or wall.
class RobotEnvironment final : public Environment {
 public:
  RobotEnvironment(const Mdp& mdp, RobotConfig cfg);
  std::unique_ptr<Environment> clone() const override { return std::make_unique<RobotEnvironment>(*this); }
  StepResult reset(std::mt19937_64& rng) override;
  StepResult step(ActionId u, std::mt19937_64& rng) override;
  double cost_resolution() const override { return mdp_->cost_resolution(); }
  const Mdp& model() const override { return *mdp_; }
  std::vector<std::string> failure_classes() const override { return {"obstacle_a", "obstacle_b", "wall"}; }
  std::optional<Point> position() const override { return pos_; }

 private:
  const Mdp* mdp_;
  RobotConfig cfg_;
  RobotGrid grid_;
  Point pos_;
  double heading_ = 0.0;
};

/// True if the path passes left of obstacle A: where it first crosses the
/// obstacle's mid-height, x is below the obstacle's left edge.
bool passes_left_of_a(const RobotConfig& cfg, const std::vector<Point>& path);

}  // namespace ccssp
