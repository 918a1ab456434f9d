#include "ccssp/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "ccssp/errors.hpp"
#include "ccssp/evaluation.hpp"
#include "ccssp/numeric.hpp"

namespace ccssp {

namespace {

// Predecessor lists: for every state, the (state, action) pairs that can move into it.
struct Predecessors {
  std::vector<std::size_t> offsets;
  std::vector<std::pair<StateId, ActionId>> pairs;
};

Predecessors predecessors(const Mdp& mdp) {
  const std::size_t n = mdp.num_states();
  std::vector<std::size_t> count(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t u = 0; u < mdp.num_actions(static_cast<StateId>(x)); ++u) {
      for (const Outcome& o : mdp.outcomes(static_cast<StateId>(x), static_cast<ActionId>(u))) {
        ++count[o.next + 1];
      }
    }
  }
  Predecessors p;
  p.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) p.offsets[i + 1] = p.offsets[i] + count[i + 1];
  p.pairs.resize(p.offsets[n]);
  std::vector<std::size_t> fill(p.offsets.begin(), p.offsets.end() - 1);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t u = 0; u < mdp.num_actions(static_cast<StateId>(x)); ++u) {
      for (const Outcome& o : mdp.outcomes(static_cast<StateId>(x), static_cast<ActionId>(u))) {
        p.pairs[fill[o.next]++] = {static_cast<StateId>(x), static_cast<ActionId>(u)};
      }
    }
  }
  return p;
}

double q_reach(const Mdp& mdp, StateId x, ActionId u, const ValueVec& v) {
  CompensatedSum s;
  for (const Outcome& o : mdp.outcomes(x, u)) s.add(o.prob * v[o.next]);
  return s.value();
}

// Gauss-Seidel sweeps on the undetermined states; returns when the sweep
// residual drops below tol or the sweep budget runs out.
void reach_sweeps(const Mdp& mdp, const std::vector<bool>& fixed, bool maximize, ValueVec& v,
                  double tol, std::size_t budget) {
  const std::size_t n = mdp.num_states();
  for (std::size_t it = 0; it < budget; ++it) {
    double res = 0.0;
    for (std::size_t xi = 0; xi < n; ++xi) {
      if (fixed[xi]) continue;
      const auto x = static_cast<StateId>(xi);
      double best = maximize ? 0.0 : 1.0;
      for (std::size_t u = 0; u < mdp.num_actions(x); ++u) {
        const double q = q_reach(mdp, x, static_cast<ActionId>(u), v);
        best = maximize ? std::max(best, q) : std::min(best, q);
      }
      res = std::max(res, std::abs(best - v[xi]));
      v[xi] = best;
    }
    if (res <= tol) return;
  }
}

}  // namespace

std::vector<bool> prob0_max(const Mdp& mdp) {
  const std::size_t n = mdp.num_states();
  const Predecessors pred = predecessors(mdp);
  std::vector<bool> reaches(n, false);
  std::deque<StateId> queue{kTerminal};
  reaches[kTerminal] = true;
  while (!queue.empty()) {
    const StateId y = queue.front();
    queue.pop_front();
    for (std::size_t i = pred.offsets[y]; i < pred.offsets[y + 1]; ++i) {
      const StateId x = pred.pairs[i].first;
      if (!reaches[x]) {
        reaches[x] = true;
        queue.push_back(x);
      }
    }
  }
  std::vector<bool> zero(n);
  for (std::size_t x = 0; x < n; ++x) zero[x] = !reaches[x];
  return zero;
}

std::vector<bool> prob0_min(const Mdp& mdp) {
  // Complement: states forced to reach 0 with positive probability. A state
  // is forced once every action has some successor already forced.
  const std::size_t n = mdp.num_states();
  const Predecessors pred = predecessors(mdp);
  std::vector<bool> forced(n, false);
  std::vector<std::size_t> live_actions(n);
  std::vector<std::vector<bool>> action_hit(n);
  for (std::size_t x = 0; x < n; ++x) {
    live_actions[x] = mdp.num_actions(static_cast<StateId>(x));
    action_hit[x].assign(live_actions[x], false);
  }
  std::deque<StateId> queue{kTerminal};
  forced[kTerminal] = true;
  while (!queue.empty()) {
    const StateId y = queue.front();
    queue.pop_front();
    for (std::size_t i = pred.offsets[y]; i < pred.offsets[y + 1]; ++i) {
      const auto [x, u] = pred.pairs[i];
      if (forced[x] || action_hit[x][u]) continue;
      action_hit[x][u] = true;
      if (--live_actions[x] == 0) {
        forced[x] = true;
        queue.push_back(x);
      }
    }
  }
  std::vector<bool> zero(n);
  for (std::size_t x = 0; x < n; ++x) zero[x] = !forced[x];
  return zero;
}

StationaryPolicy maxprob_policy(const Mdp& mdp, const ValueVec& p_max, double tol) {
  const std::size_t n = mdp.num_states();
  const Predecessors pred = predecessors(mdp);
  std::vector<ActionId> act(n, kNoAction);
  act[kTerminal] = 0;
  // Attractor over near-optimal actions, grown backwards from 0.
  std::vector<bool> in(n, false);
  in[kTerminal] = true;
  std::deque<StateId> queue{kTerminal};
  while (!queue.empty()) {
    const StateId y = queue.front();
    queue.pop_front();
    std::vector<std::pair<StateId, ActionId>> cand(pred.pairs.begin() + static_cast<std::ptrdiff_t>(pred.offsets[y]),
                                                   pred.pairs.begin() + static_cast<std::ptrdiff_t>(pred.offsets[y + 1]));
    std::sort(cand.begin(), cand.end());
    for (const auto& [x, u] : cand) {
      if (in[x] || p_max[x] <= 0.0) continue;
      if (q_reach(mdp, x, u, p_max) >= p_max[x] - tol) {
        in[x] = true;
        act[x] = u;
        queue.push_back(x);
      }
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (act[x] != kNoAction) continue;
    // Dead states (or states the attractor missed): best action, lowest index.
    const auto xs = static_cast<StateId>(x);
    double best = -1.0;
    for (std::size_t u = 0; u < mdp.num_actions(xs); ++u) {
      const double q = q_reach(mdp, xs, static_cast<ActionId>(u), p_max);
      if (q > best + tol) {
        best = q;
        act[x] = static_cast<ActionId>(u);
      }
    }
  }
  return StationaryPolicy::deterministic(std::move(act));
}

StationaryPolicy minprob_policy(const Mdp& mdp, const ValueVec& p_min, const std::vector<ActionId>& stay,
                                double tol) {
  const std::size_t n = mdp.num_states();
  std::vector<ActionId> act(n, 0);
  for (std::size_t x = 1; x < n; ++x) {
    const auto xs = static_cast<StateId>(x);
    if (x < stay.size() && stay[x] != kNoAction) {
      act[x] = stay[x];
      continue;
    }
    double best = 2.0;
    for (std::size_t u = 0; u < mdp.num_actions(xs); ++u) {
      const double q = q_reach(mdp, xs, static_cast<ActionId>(u), p_min);
      if (q < best - tol) {
        best = q;
        act[x] = static_cast<ActionId>(u);
      }
    }
  }
  return StationaryPolicy::deterministic(std::move(act));
}

namespace {

// Policy iteration from a VI warm start. Values under a fixed policy are
// exact linear solves; switches happen only on strict improvement, which
// cannot close a trap for maximization and keeps min-reach monotone.
ValueVec refine_reach(const Mdp& mdp, const std::vector<bool>& fixed, bool maximize, const ValueVec& warm,
                      const std::vector<ActionId>& stay, const SolveOptions& opts) {
  const std::size_t n = mdp.num_states();
  std::vector<ActionId> act =
      (maximize ? maxprob_policy(mdp, warm) : minprob_policy(mdp, warm, stay)).actions();
  for (std::size_t it = 0;; ++it) {
    if (it > 10'000) throw MaxItersExceeded("reachability policy iteration did not stabilize");
    ValueVec exact = reach_probability(mdp, StationaryPolicy::deterministic(act), opts);
    for (std::size_t x = 0; x < n; ++x) {
      if (fixed[x] && x != kTerminal) exact[x] = 0.0;
    }
    exact[kTerminal] = 1.0;
    bool changed = false;
    for (std::size_t x = 1; x < n; ++x) {
      if (fixed[x]) continue;
      const auto xs = static_cast<StateId>(x);
      double best = exact[x];
      ActionId pick = kNoAction;
      for (std::size_t u = 0; u < mdp.num_actions(xs); ++u) {
        const double q = q_reach(mdp, xs, static_cast<ActionId>(u), exact);
        if (maximize ? q > best + 1e-12 : q < best - 1e-12) {
          best = q;
          pick = static_cast<ActionId>(u);
        }
      }
      if (pick != kNoAction) {
        act[x] = pick;
        changed = true;
      }
    }
    if (!changed) return exact;
  }
}

}  // namespace

ValueVec max_reach(const Mdp& mdp, const SolveOptions& opts) {
  const std::size_t n = mdp.num_states();
  const std::vector<bool> zero = prob0_max(mdp);
  ValueVec v(n, 0.0);
  v[kTerminal] = 1.0;
  std::vector<bool> fixed = zero;
  fixed[kTerminal] = true;
  reach_sweeps(mdp, fixed, true, v, opts.vi_tol, 100'000);
  return refine_reach(mdp, fixed, true, v, {}, opts);
}

namespace {

std::vector<ActionId> stay_actions(const Mdp& mdp, const std::vector<bool>& avoid) {
  std::vector<ActionId> stay(mdp.num_states(), kNoAction);
  for (std::size_t x = 1; x < mdp.num_states(); ++x) {
    if (!avoid[x]) continue;
    const auto xs = static_cast<StateId>(x);
    for (std::size_t u = 0; u < mdp.num_actions(xs); ++u) {
      bool inside = true;
      for (const Outcome& o : mdp.outcomes(xs, static_cast<ActionId>(u))) inside = inside && avoid[o.next];
      if (inside) {
        stay[x] = static_cast<ActionId>(u);
        break;
      }
    }
    if (stay[x] == kNoAction) {
      throw NoStayAction("attention state " + std::to_string(x) + " has no action staying in the set");
    }
  }
  return stay;
}

}  // namespace

ValueVec min_reach(const Mdp& mdp, const SolveOptions& opts) {
  const std::size_t n = mdp.num_states();
  const std::vector<bool> zero = prob0_min(mdp);
  const std::vector<ActionId> stay = stay_actions(mdp, zero);
  ValueVec v(n, 1.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (zero[x]) v[x] = 0.0;
  }
  std::vector<bool> fixed = zero;
  fixed[kTerminal] = true;
  // Sweeping down from 1 converges to the min-reach values once the
  // avoidance set is pinned at 0.
  reach_sweeps(mdp, fixed, false, v, opts.vi_tol, 100'000);
  return refine_reach(mdp, fixed, false, v, stay, opts);
}

ReachAnalysis analyze(const Mdp& mdp, const SolveOptions& opts) {
  const auto issues = validate_mdp(mdp);
  if (!issues.empty()) throw ConfigInvalid("invalid model: " + issues.front());
  ReachAnalysis a;
  const std::size_t n = mdp.num_states();
  a.p_max = max_reach(mdp, opts);
  a.p_min = min_reach(mdp, opts);
  a.is_dead = prob0_max(mdp);
  a.is_attention = prob0_min(mdp);
  a.is_dead[kTerminal] = false;
  a.is_attention[kTerminal] = false;
  for (std::size_t x = 1; x < n; ++x) {
    if (a.is_dead[x]) a.dead_all.push_back(static_cast<StateId>(x));
    if (a.is_attention[x]) a.attention.push_back(static_cast<StateId>(x));
  }
  a.stay_action = stay_actions(mdp, a.is_attention);
  a.minprob = minprob_policy(mdp, a.p_min, a.stay_action);
  a.maxprob = maxprob_policy(mdp, a.p_max);
  return a;
}

}  // namespace ccssp
