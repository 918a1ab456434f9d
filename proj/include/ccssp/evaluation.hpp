#pragma once

#include <optional>

#include "ccssp/cost_model.hpp"
#include "ccssp/mdp.hpp"

namespace ccssp {

/// Induced chain of a stationary policy as a one-row-per-state cost model.
/// The objective channel carries expected one-stage cost, the constraint
/// channel carries h_d (1 off the terminal); successor weights are scaled
/// by `discount`.
CostModel induced_chain(const Mdp& mdp, const StationaryPolicy& policy, double discount);

/// Expected (discounted) total cost J(x; pi) for every state.
/// With discount = 1, states whose value is infinite raise Divergent, either
/// any such state or, when `from` is given, only if `from` is one of them.
/// Other infinite entries are returned as +inf.
ValueVec evaluate_policy(const Mdp& mdp, const StationaryPolicy& policy, double discount,
                         std::optional<StateId> from = std::nullopt, const SolveOptions& opts = {});

/// Probability of ever reaching state 0, per state.
ValueVec reach_probability(const Mdp& mdp, const StationaryPolicy& policy, const SolveOptions& opts = {});

/// Pr(never reach 0 | x0).
double failure_probability(const Mdp& mdp, const StationaryPolicy& policy, StateId x0,
                           const SolveOptions& opts = {});

/// L_d^gamma = E[sum_t gamma^t (1-gamma) h_d(x_t)] per state.
ValueVec discounted_failure_vector(const Mdp& mdp, const StationaryPolicy& policy, double gamma,
                                   const SolveOptions& opts = {});

double discounted_failure_measure(const Mdp& mdp, const StationaryPolicy& policy, StateId x0,
                                  double gamma, const SolveOptions& opts = {});

}  // namespace ccssp
