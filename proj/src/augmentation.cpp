#include "ccssp/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "ccssp/errors.hpp"
#include "ccssp/evaluation.hpp"

namespace ccssp {

CostLevelGrid::CostLevelGrid(double delta, double cap, std::vector<std::int64_t> units)
    : delta_(delta), cap_(cap), units_(std::move(units)) {
  std::sort(units_.begin(), units_.end());
  lookup_.reserve(units_.size() * 2);
  for (std::size_t i = 0; i < units_.size(); ++i) lookup_.emplace(units_[i], i);
}

std::int64_t CostLevelGrid::to_units(double cost) const { return std::llround(cost / delta_); }

bool CostLevelGrid::below_cap(std::int64_t units) const {
  return static_cast<double>(units) * delta_ < cap_ - 1e-9 * std::max(1.0, cap_);
}

std::optional<std::size_t> CostLevelGrid::index_of(std::int64_t units) const {
  if (!below_cap(units)) return std::nullopt;
  const auto it = lookup_.find(units);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

CostLevelGrid cost_levels(const Mdp& mdp, double cap, std::size_t max_levels) {
  const double delta = mdp.cost_resolution();
  if (!(cap >= delta)) throw ConfigInvalid("cost cap must be at least the cost resolution");
  std::set<std::int64_t> steps;
  for (std::size_t x = 1; x < mdp.num_states(); ++x) {
    for (std::size_t u = 0; u < mdp.num_actions(static_cast<StateId>(x)); ++u) {
      for (const Outcome& o : mdp.outcomes(static_cast<StateId>(x), static_cast<ActionId>(u))) {
        const auto g = std::llround(o.cost / delta);
        if (g > 0) steps.insert(g);
      }
    }
  }
  const CostLevelGrid probe(delta, cap, {});
  std::set<std::int64_t> seen{0};
  std::deque<std::int64_t> queue{0};
  while (!queue.empty()) {
    const std::int64_t r = queue.front();
    queue.pop_front();
    for (const std::int64_t g : steps) {
      const std::int64_t next = r + g;
      if (!probe.below_cap(next)) break;
      if (seen.insert(next).second) {
        if (seen.size() > max_levels) {
          throw GridExplosion("more than " + std::to_string(max_levels) + " cost levels below the cap");
        }
        queue.push_back(next);
      }
    }
  }
  return CostLevelGrid(delta, cap, std::vector<std::int64_t>(seen.begin(), seen.end()));
}

AugmentedS build_s(const Mdp& mdp, double gamma, double cap, const StationaryPolicy& fallback,
                   const ValueVec& p_min, const BuildSOptions& opts) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigInvalid("gamma must lie in (0,1)");
  const std::size_t n = mdp.num_states();
  fallback.check_compatible(mdp);
  if (p_min.size() != n) throw ConfigInvalid("min-reach vector does not match the model");

  AugmentedS aug;
  aug.gamma = gamma;
  aug.base_states = n;
  aug.fallback = fallback;
  aug.grid = cost_levels(mdp, cap, opts.max_levels);
  aug.fallback_reach = reach_probability(mdp, fallback);
  for (std::size_t x = 0; x < n; ++x) {
    if (std::abs(aug.fallback_reach[x] - p_min[x]) > opts.minprob_tol) {
      throw NotMinprob("fallback reaches the terminal from state " + std::to_string(x) + " with probability " +
                       std::to_string(aug.fallback_reach[x]) + ", minimum is " + std::to_string(p_min[x]));
    }
  }
  {
    // b(x) = sum p (g a(x') + b(x')) with b(0) = 0.
    CostModelBuilder b(n);
    for (std::size_t xi = 0; xi < n; ++xi) {
      const auto x = static_cast<StateId>(xi);
      b.open_state();
      if (x == kTerminal) {
        b.add_row(0.0, 0.0, 0);
        continue;
      }
      const ActionId u = fallback.action(x);
      double c = 0.0;
      for (const Outcome& o : mdp.outcomes(x, u)) c += o.prob * o.cost * aug.fallback_reach[o.next];
      b.add_row(c, 0.0, u);
      for (const Outcome& o : mdp.outcomes(x, u)) {
        if (o.next != kTerminal) b.add_successor(o.prob, o.next);
      }
    }
    const CostModel chain = std::move(b).build();
    std::vector<std::size_t> rows(n);
    for (std::size_t x = 0; x < n; ++x) rows[x] = x;
    aug.fallback_cost = evaluate_rows(chain, rows, 1.0, 0.0);
  }
  aug.fallback_failure = discounted_failure_vector(mdp, fallback, gamma);

  const CostLevelGrid& grid = aug.grid;
  const std::size_t levels = grid.size();
  const double delta = grid.delta();
  CostModelBuilder b((n - 1) * levels);
  for (std::size_t xi = 1; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    for (std::size_t l = 0; l < levels; ++l) {
      b.open_state();
      const std::int64_t r = grid.units()[l];
      for (std::size_t ui = 0; ui < mdp.num_actions(x); ++ui) {
        const auto u = static_cast<ActionId>(ui);
        double obj = 0.0;
        double cond = 1.0 - gamma;
        const auto outs = mdp.outcomes(x, u);
        for (const Outcome& o : outs) {
          const std::int64_t r2 = r + grid.to_units(o.cost);
          const double total = static_cast<double>(r2) * delta;
          const double w = gamma * o.prob;
          if (o.next == kTerminal) {
            obj += w * total;
          } else if (!grid.below_cap(r2)) {
            obj += w * (total * aug.fallback_reach[o.next] + aug.fallback_cost[o.next]);
            cond += w * aug.fallback_failure[o.next];
          }
        }
        b.add_row(obj, cond, u);
        for (const Outcome& o : outs) {
          if (o.next == kTerminal) continue;
          const std::int64_t r2 = r + grid.to_units(o.cost);
          const auto idx = grid.index_of(r2);
          if (idx) b.add_successor(gamma * o.prob, aug.index(o.next, *idx));
        }
      }
    }
  }
  aug.model = std::move(b).build();
  return aug;
}

AugmentedM build_m(const Mdp& mdp, double gamma, const std::vector<bool>& attention,
                   const std::vector<ActionId>& stay_action) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigInvalid("gamma must lie in (0,1)");
  const std::size_t n = mdp.num_states();
  if (attention.size() != n || stay_action.size() != n) {
    throw ConfigInvalid("attention data does not match the model");
  }
  AugmentedM aug;
  aug.gamma = gamma;
  aug.base_states = n;
  aug.attention = attention;
  aug.stay_action = stay_action;

  const double leak = 1.0 - gamma;
  CostModelBuilder b(2 * n + 1);
  auto add_action_rows = [&](StateId x, ActionId u, bool from_failed, bool declare, double obj, double cond) {
    b.add_row(obj, cond, label_tag(u, declare));
    for (const Outcome& o : mdp.outcomes(x, u)) {
      b.add_successor(gamma * o.prob, aug.index(o.next, from_failed || declare));
    }
  };

  // Success-labelled block.
  for (std::size_t xi = 0; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    b.open_state();
    const double cond = x == kTerminal ? 0.0 : leak;
    for (std::size_t u = 0; u < mdp.num_actions(x); ++u) {
      add_action_rows(x, static_cast<ActionId>(u), false, false, mdp.expected_cost(x, static_cast<ActionId>(u)), cond);
    }
    if (x != kTerminal && attention[xi]) {
      for (std::size_t u = 0; u < mdp.num_actions(x); ++u) {
        add_action_rows(x, static_cast<ActionId>(u), false, true, mdp.expected_cost(x, static_cast<ActionId>(u)), cond);
      }
    }
  }
  // Failure-labelled block.
  for (std::size_t xi = 0; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    b.open_state();
    if (x == kTerminal) {
      add_action_rows(x, 0, true, true, 1.0, 0.0);
    } else if (attention[xi]) {
      if (stay_action[xi] == kNoAction) throw NoStayAction("no stay action at attention state " + std::to_string(xi));
      add_action_rows(x, stay_action[xi], true, true, 0.0, leak);
    } else {
      add_action_rows(x, 0, true, true, 0.0, leak);
    }
  }
  // Artificial terminal.
  b.open_state();
  b.add_row(0.0, 0.0, label_tag(0, true));
  b.add_successor(1.0, aug.artificial());

  aug.model = std::move(b).build();
  return aug;
}

AugmentedM build_m(const Mdp& mdp, double gamma, const ReachAnalysis& analysis) {
  return build_m(mdp, gamma, analysis.is_attention, analysis.stay_action);
}

Mdp gamma_leak(const Mdp& mdp, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigInvalid("gamma must lie in (0,1)");
  MdpBuilder b(mdp.num_states(), mdp.cost_resolution());
  for (std::size_t xi = 0; xi < mdp.num_states(); ++xi) {
    const auto x = static_cast<StateId>(xi);
    for (std::size_t ui = 0; ui < mdp.num_actions(x); ++ui) {
      const auto u = static_cast<ActionId>(ui);
      const auto outs = mdp.outcomes(x, u);
      std::vector<Outcome> row(outs.begin(), outs.end());
      if (x != kTerminal) {
        for (Outcome& o : row) o.prob *= gamma;
        row.push_back({1.0 - gamma, kTerminal, mdp.expected_cost(x, u)});
      }
      b.add_action(x, std::move(row));
    }
  }
  return std::move(b).build();
}

}  // namespace ccssp
