#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ccssp/game_solver.hpp"
#include "ccssp/mdp.hpp"
#include "ccssp/policy.hpp"
#include "ccssp/reachability.hpp"
#include "ccssp/robot_domain.hpp"
#include "ccssp/simulator.hpp"

namespace ccssp::io {

inline constexpr const char* kFormatVersion = "1";

/// Model file: {"format_version", "kind": "mdp", "cost_resolution",
/// "start"?, "states": [[[[p, next, cost], ...] per action] per state]}.
struct ModelFile {
  Mdp mdp;
  std::optional<StateId> start;
};

std::string model_to_string(const Mdp& mdp, std::optional<StateId> start = std::nullopt);
ModelFile model_from_string(const std::string& text);

std::string policy_to_string(const Policy& policy);
Policy policy_from_string(const std::string& text);

std::string analysis_to_string(const ReachAnalysis& analysis);
std::string report_to_string(const SolveReport& report);

/// Stats file carries a display label used by the report table.
std::string stats_to_string(const EpisodeStats& stats, const std::string& label);
std::pair<EpisodeStats, std::string> stats_from_string(const std::string& text);

/// Robot sidecar: configuration plus per-state cell boxes for plotting.
std::string robot_meta_to_string(const RobotConfig& cfg);
RobotConfig robot_meta_from_string(const std::string& text);

/// Augmented models in the model layout: rows carry both cost channels and
/// (weight, successor) pairs; "index" maps each augmented state back to
/// (x, cost level) or (x, label).
std::string augmented_to_string(const AugmentedS& aug);
std::string augmented_to_string(const AugmentedM& aug);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ccssp::io
