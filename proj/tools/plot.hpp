#pragma once

#include <string>
#include <vector>

#include "ccssp/robot_domain.hpp"
#include "ccssp/simulator.hpp"

namespace ccssp::cli {

/// Workspace with obstacles, goal and start region, one polyline per
/// trajectory. Successful episodes are blue, collisions red, truncated gray.
std::string render_svg(const RobotConfig& cfg, const std::vector<Trajectory>& trajectories,
                       const std::string& title);

/// t,state,action,cost,cumulative[,x,y]; the row for t = 0 has no action.
std::string trajectory_csv(const Trajectory& t);

}  // namespace ccssp::cli
