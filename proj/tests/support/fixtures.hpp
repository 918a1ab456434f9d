#pragma once

#include <random>
#include <vector>

#include "ccssp/mdp.hpp"

namespace fixtures {

using ccssp::ActionId;
using ccssp::Mdp;
using ccssp::Outcome;
using ccssp::StateId;

inline constexpr ActionId kRisky = 0;
inline constexpr ActionId kSafe = 1;

/// State 1: risky (0.9 to goal at cost 1, 0.1 to the dead-end 4 at cost 0)
/// or safe (goal at cost 3). States 2 and 3 are filler, 4 is a dead-end.
inline Mdp two_path() {
  return Mdp::from_table(1.0, {
                                  {{{1.0, 0, 0.0}}},
                                  {{{0.9, 0, 1.0}, {0.1, 4, 0.0}}, {{1.0, 0, 3.0}}},
                                  {{{1.0, 0, 1.0}}},
                                  {{{1.0, 2, 1.0}}},
                                  {{{1.0, 4, 1.0}}},
                              });
}

/// 3 -> 2 -> 1 -> 0, unit costs.
inline Mdp unit_chain() {
  return Mdp::from_table(1.0, {
                                  {{{1.0, 0, 0.0}}},
                                  {{{1.0, 0, 1.0}}},
                                  {{{1.0, 1, 1.0}}},
                                  {{{1.0, 2, 1.0}}},
                              });
}

/// Every action reaches the goal with probability 1.
inline Mdp no_dead_end() {
  return Mdp::from_table(1.0, {
                                  {{{1.0, 0, 0.0}}},
                                  {{{0.5, 0, 1.0}, {0.5, 2, 1.0}}, {{1.0, 2, 2.0}}},
                                  {{{1.0, 0, 2.0}}, {{0.25, 1, 1.0}, {0.75, 0, 1.0}}},
                              });
}

/// Failing early is cheaper than failing late: from 1 the only action goes
/// to the attention state 2 (cost 1). At 2, "push" reaches the goal w.p.
/// 0.5 (cost 1) and otherwise the dead-end 3 (cost 10); "wait" stays (cost 1).
/// 3 self-loops with cost 5.
inline Mdp early_failure() {
  return Mdp::from_table(1.0, {
                                  {{{1.0, 0, 0.0}}},
                                  {{{1.0, 2, 1.0}}},
                                  {{{0.5, 0, 1.0}, {0.5, 3, 10.0}}, {{1.0, 2, 1.0}}},
                                  {{{1.0, 3, 5.0}}},
                              });
}

struct RandomSpec {
  int min_states = 2;  // including the terminal
  int max_states = 6;
  int max_actions = 3;
  int max_outcomes = 3;
  int max_cost = 3;
  double dead_end_chance = 0.3;
};

/// Random MDP with probabilities on a quarter grid and integer costs >= 1.
/// Some states are absorbing dead-ends.
inline Mdp random_mdp(std::mt19937_64& rng, const RandomSpec& spec = {}) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = uni(spec.min_states, spec.max_states);
  std::vector<std::vector<std::vector<Outcome>>> table(static_cast<std::size_t>(n));
  table[0] = {{{1.0, 0, 0.0}}};
  for (int x = 1; x < n; ++x) {
    if (std::bernoulli_distribution(spec.dead_end_chance)(rng)) {
      table[x] = {{{1.0, x, static_cast<double>(uni(1, spec.max_cost))}}};
      continue;
    }
    const int k = uni(1, spec.max_actions);
    for (int u = 0; u < k; ++u) {
      const int m = uni(1, spec.max_outcomes);
      std::vector<int> quarters(static_cast<std::size_t>(m), 1);
      for (int left = 4 - m; left > 0 && m > 0; --left) ++quarters[static_cast<std::size_t>(uni(0, m - 1))];
      std::vector<Outcome> outs;
      for (int j = 0; j < m; ++j) {
        outs.push_back({quarters[j] / 4.0, uni(0, n - 1), static_cast<double>(uni(1, spec.max_cost))});
      }
      table[x].push_back(std::move(outs));
    }
  }
  return Mdp::from_table(1.0, table);
}

}  // namespace fixtures
