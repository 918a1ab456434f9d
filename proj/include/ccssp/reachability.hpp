#pragma once

#include <vector>

#include "ccssp/cost_model.hpp"
#include "ccssp/mdp.hpp"

namespace ccssp {

/// States with no path to 0 under any action choice (max-reach prob 0).
std::vector<bool> prob0_max(const Mdp& mdp);

/// Greatest set of non-terminal states in which some policy can stay
/// forever (min-reach prob 0).
std::vector<bool> prob0_min(const Mdp& mdp);

/// Maximal probability of reaching state 0.
ValueVec max_reach(const Mdp& mdp, const SolveOptions& opts = {});

/// Minimal probability of reaching state 0.
ValueVec min_reach(const Mdp& mdp, const SolveOptions& opts = {});

/// Deterministic policy attaining p_max everywhere. Among optimal actions
/// the choice makes progress towards 0, so no end component traps it.
StationaryPolicy maxprob_policy(const Mdp& mdp, const ValueVec& p_max, double tol = 1e-9);

/// Deterministic policy attaining p_min everywhere; on avoidance states it
/// follows the stay action.
StationaryPolicy minprob_policy(const Mdp& mdp, const ValueVec& p_min,
                                const std::vector<ActionId>& stay, double tol = 1e-9);

struct ReachAnalysis {
  ValueVec p_max;
  ValueVec p_min;
  std::vector<StateId> dead_all;   // p_max = 0
  std::vector<StateId> attention;  // p_min = 0
  std::vector<bool> is_dead;
  std::vector<bool> is_attention;
  /// mu_d: defined on attention states, kNoAction elsewhere.
  std::vector<ActionId> stay_action;
  /// Full MINPROB-optimal policy, used as the fallback beyond the cost cap.
  StationaryPolicy minprob;
  /// Full MAXPROB-optimal policy.
  StationaryPolicy maxprob;
};

ReachAnalysis analyze(const Mdp& mdp, const SolveOptions& opts = {});

}  // namespace ccssp
