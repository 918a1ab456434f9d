#include "ccssp/baselines.hpp"

#include <cmath>

#include "ccssp/augmentation.hpp"
#include "ccssp/errors.hpp"
#include "ccssp/evaluation.hpp"
#include "ccssp/numeric.hpp"

namespace ccssp {

RestrictedMdp restrict_maxprob(const Mdp& mdp, const ValueVec& p_max, double tol) {
  const std::size_t n = mdp.num_states();
  if (p_max.size() != n) throw ConfigInvalid("p_max does not match the model");
  RestrictedMdp out;
  out.original_action.resize(n);
  MdpBuilder b(n, mdp.cost_resolution());
  for (std::size_t xi = 0; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    for (std::size_t ui = 0; ui < mdp.num_actions(x); ++ui) {
      const auto u = static_cast<ActionId>(ui);
      CompensatedSum q;
      for (const Outcome& o : mdp.outcomes(x, u)) q.add(o.prob * p_max[o.next]);
      if (x == kTerminal || q.value() >= p_max[xi] - tol) {
        const auto outs = mdp.outcomes(x, u);
        b.add_action(x, std::vector<Outcome>(outs.begin(), outs.end()));
        out.original_action[xi].push_back(u);
      }
    }
    if (out.original_action[xi].empty()) {
      throw SolveFailure("state " + std::to_string(xi) + " lost every action under the max-probability restriction");
    }
  }
  out.mdp = std::move(b).build();
  return out;
}

namespace {

// Progress ranks towards 0 over a given action choice set: rank 0 at the
// terminal, rank k+1 when some allowed action reaches rank k.
std::vector<std::size_t> progress_rank(const Mdp& mdp, const std::vector<std::vector<bool>>& allowed,
                                       const std::vector<bool>& active) {
  const std::size_t n = mdp.num_states();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> rank(n, kNone);
  rank[kTerminal] = 0;
  for (std::size_t level = 0;; ++level) {
    bool grew = false;
    for (std::size_t x = 1; x < n; ++x) {
      if (!active[x] || rank[x] != kNone) continue;
      for (std::size_t u = 0; u < allowed[x].size() && rank[x] == kNone; ++u) {
        if (!allowed[x][u]) continue;
        for (const Outcome& o : mdp.outcomes(static_cast<StateId>(x), static_cast<ActionId>(u))) {
          if (rank[o.next] == level) {
            rank[x] = level + 1;
            grew = true;
            break;
          }
        }
      }
    }
    if (!grew) break;
  }
  return rank;
}

}  // namespace

S3pMaxResult solve_s3p_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0, const SolveOptions& opts) {
  const std::size_t n = mdp.num_states();
  if (analysis.p_max.at(x0) <= 0.0) throw NoSuccessPath("start state " + std::to_string(x0) + " cannot reach the goal");
  const RestrictedMdp rm = restrict_maxprob(mdp, analysis.p_max);
  const ValueVec& pm = analysis.p_max;

  // Success-conditioned model over live states (p_max > 0).
  CostModelBuilder b(n);
  for (std::size_t xi = 0; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    b.open_state();
    if (x == kTerminal || pm[xi] <= 0.0) {
      b.add_row(0.0, 0.0, 0);
      continue;
    }
    for (std::size_t k = 0; k < rm.mdp.num_actions(x); ++k) {
      const auto outs = rm.mdp.outcomes(x, static_cast<ActionId>(k));
      CompensatedSum total;
      for (const Outcome& o : outs) total.add(o.prob * pm[o.next]);
      const double norm = total.value();
      double cost = 0.0;
      for (const Outcome& o : outs) cost += o.prob * pm[o.next] / norm * o.cost;
      b.add_row(cost, 0.0, rm.original_action[xi][k]);
      for (const Outcome& o : outs) {
        if (o.next != kTerminal && pm[o.next] > 0.0) b.add_successor(o.prob * pm[o.next] / norm, o.next);
      }
    }
  }
  const CostModel cm = std::move(b).build();
  GreedySolution g = solve_weighted(cm, 1.0, 0.0, opts);

  // Among near-optimal rows prefer progress towards the goal so zero-cost
  // loops cannot stall the policy.
  std::vector<std::vector<bool>> allowed(n);
  std::vector<bool> active(n, false);
  for (std::size_t xi = 1; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    if (pm[xi] <= 0.0) continue;
    active[xi] = true;
    allowed[xi].assign(mdp.num_actions(x), false);
    for (std::size_t r = cm.first_row(x); r < cm.end_row(x); ++r) {
      CompensatedSum q;
      q.add(cm.obj(r));
      const auto w = cm.weights(r);
      const auto nx = cm.successors(r);
      for (std::size_t k = 0; k < w.size(); ++k) q.add(w[k] * g.values[nx[k]]);
      if (q.value() <= g.values[xi] + 1e-9 * (1.0 + std::abs(g.values[xi]))) {
        allowed[xi][static_cast<std::size_t>(cm.tag(r))] = true;
      }
    }
  }
  const std::vector<std::size_t> rank = progress_rank(mdp, allowed, active);
  std::vector<ActionId> act(n, 0);
  for (std::size_t xi = 1; xi < n; ++xi) {
    if (!active[xi]) {
      act[xi] = analysis.maxprob.action(static_cast<StateId>(xi));
      continue;
    }
    act[xi] = static_cast<ActionId>(cm.tag(g.rows[xi]));
    for (std::size_t u = 0; u < allowed[xi].size(); ++u) {
      if (!allowed[xi][u]) continue;
      bool progresses = false;
      for (const Outcome& o : mdp.outcomes(static_cast<StateId>(xi), static_cast<ActionId>(u))) {
        if (rank[o.next] != static_cast<std::size_t>(-1) && rank[o.next] + 1 == rank[xi]) progresses = true;
      }
      if (progresses) {
        act[xi] = static_cast<ActionId>(u);
        break;
      }
    }
  }
  S3pMaxResult out;
  out.policy = StationaryPolicy::deterministic(std::move(act));
  // Exact conditional value of the final policy on the conditioned chain.
  std::vector<std::size_t> rows(n);
  for (std::size_t xi = 0; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    rows[xi] = cm.first_row(x);
    for (std::size_t r = cm.first_row(x); r < cm.end_row(x); ++r) {
      if (active[xi] && cm.tag(r) == out.policy.action(x)) rows[xi] = r;
    }
  }
  out.conditional_values = evaluate_rows(cm, rows, 1.0, 0.0, opts);
  out.conditional_cost = out.conditional_values[x0];
  return out;
}

McmpMaxResult solve_mcmp_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0, double gamma,
                             const SolveOptions& opts) {
  const std::size_t n = mdp.num_states();
  if (analysis.p_max.at(x0) <= 0.0) throw NoSuccessPath("start state " + std::to_string(x0) + " cannot reach the goal");
  const RestrictedMdp rm = restrict_maxprob(mdp, analysis.p_max);
  // Dead-ends keep every action inside the dead set, so action 0 stays.
  std::vector<ActionId> stay(n, kNoAction);
  for (std::size_t x = 1; x < n; ++x) {
    if (analysis.is_dead[x]) stay[x] = 0;
  }
  const AugmentedM aug = build_m(rm.mdp, gamma, analysis.is_dead, stay);
  const GreedySolution g = solve_weighted(aug.model, 1.0, 0.0, opts);
  const StateId start = aug.index(x0, false);

  McmpMaxResult out;
  out.cost = g.values[start];
  out.j_cond = evaluate_rows(aug.model, g.rows, 0.0, 1.0, opts)[start];
  LabeledPolicy restricted = make_labeled(aug, g.rows);
  out.policy.base_states = n;
  out.policy.table.resize(restricted.table.size());
  for (std::size_t s = 0; s < restricted.table.size(); ++s) {
    const std::int64_t tag = restricted.table[s];
    const std::size_t x = s < 2 * n ? s % n : 0;
    const ActionId orig = rm.original_action[x].at(static_cast<std::size_t>(tag_action(tag)));
    out.policy.table[s] = label_tag(orig, tag_declares(tag));
  }
  return out;
}

SolveReport report_s3p_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0, double gamma) {
  const S3pMaxResult r = solve_s3p_max(mdp, analysis, x0);
  SolveReport rep;
  rep.method = "s3p-max";
  rep.objective = Objective::s3p;
  rep.start = x0;
  rep.gamma = gamma;
  rep.epsilon = 1.0 - analysis.p_max[x0];
  ComponentReport c;
  c.weight = 1.0;
  c.policy = r.policy;
  c.alpha_hat = 1.0;
  c.j_obj = r.conditional_cost;
  c.j_cond = discounted_failure_measure(mdp, r.policy, x0, gamma);
  c.j_s3p = r.conditional_cost;
  rep.components.push_back(c);
  rep.mixture_j_obj = c.j_obj;
  rep.mixture_j_cond = c.j_cond;
  rep.min_failure_measure = c.j_cond;
  rep.objective_value = r.conditional_cost;
  rep.feasible = true;
  return rep;
}

SolveReport report_mcmp_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0, double gamma) {
  const McmpMaxResult r = solve_mcmp_max(mdp, analysis, x0, gamma);
  SolveReport rep;
  rep.method = "mcmp-max";
  rep.objective = Objective::mcmp;
  rep.start = x0;
  rep.gamma = gamma;
  rep.epsilon = 1.0 - analysis.p_max[x0];
  ComponentReport c;
  c.weight = 1.0;
  c.policy = r.policy;
  c.alpha_hat = 1.0;
  c.j_obj = r.cost;
  c.j_cond = r.j_cond;
  c.j_s3p = r.cost;
  rep.components.push_back(c);
  rep.mixture_j_obj = c.j_obj;
  rep.mixture_j_cond = c.j_cond;
  rep.min_failure_measure = c.j_cond;
  rep.objective_value = r.cost;
  rep.feasible = true;
  return rep;
}

}  // namespace ccssp
