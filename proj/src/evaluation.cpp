#include "ccssp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccssp/errors.hpp"

namespace ccssp {

namespace {

void check_unit_interval(double v, const char* name, bool allow_one) {
  if (!(v > 0.0) || v > 1.0 || (!allow_one && v == 1.0)) {
    throw ConfigInvalid(std::string(name) + " must lie in (0,1" + (allow_one ? "]" : ")"));
  }
}

}  // namespace

CostModel induced_chain(const Mdp& mdp, const StationaryPolicy& policy, double discount) {
  policy.check_compatible(mdp);
  CostModelBuilder b(mdp.num_states());
  for (std::size_t xi = 0; xi < mdp.num_states(); ++xi) {
    const auto x = static_cast<StateId>(xi);
    b.open_state();
    const auto choices = policy.choices(x);
    double cost = 0.0;
    for (const auto& [u, pu] : choices) cost += pu * mdp.expected_cost(x, u);
    b.add_row(cost, x == kTerminal ? 0.0 : 1.0, 0);
    for (const auto& [u, pu] : choices) {
      for (const Outcome& o : mdp.outcomes(x, u)) b.add_successor(discount * pu * o.prob, o.next);
    }
  }
  return std::move(b).build();
}

ValueVec evaluate_policy(const Mdp& mdp, const StationaryPolicy& policy, double discount,
                         std::optional<StateId> from, const SolveOptions& opts) {
  check_unit_interval(discount, "discount", true);
  const CostModel chain = induced_chain(mdp, policy, discount);
  std::vector<std::size_t> rows(chain.num_states());
  for (std::size_t x = 0; x < rows.size(); ++x) rows[x] = x;
  ValueVec v = evaluate_rows(chain, rows, 1.0, 0.0, opts);
  std::vector<int> bad;
  for (std::size_t x = 0; x < v.size(); ++x) {
    if (std::isinf(v[x])) bad.push_back(static_cast<int>(x));
  }
  if (!bad.empty()) {
    const bool hit = !from.has_value() || std::isinf(v.at(*from));
    if (hit) {
      throw Divergent("expected total cost is infinite: positive-cost recurrent behaviour reachable", bad);
    }
  }
  return v;
}

ValueVec reach_probability(const Mdp& mdp, const StationaryPolicy& policy, const SolveOptions& opts) {
  policy.check_compatible(mdp);
  CostModelBuilder b(mdp.num_states());
  for (std::size_t xi = 0; xi < mdp.num_states(); ++xi) {
    const auto x = static_cast<StateId>(xi);
    b.open_state();
    if (x == kTerminal) {
      b.add_row(1.0, 0.0, 0);
      continue;
    }
    const auto choices = policy.choices(x);
    double hit = 0.0;
    for (const auto& [u, pu] : choices) {
      for (const Outcome& o : mdp.outcomes(x, u)) {
        if (o.next == kTerminal) hit += pu * o.prob;
      }
    }
    b.add_row(hit, 0.0, 0);
    for (const auto& [u, pu] : choices) {
      for (const Outcome& o : mdp.outcomes(x, u)) {
        if (o.next != kTerminal) b.add_successor(pu * o.prob, o.next);
      }
    }
  }
  const CostModel chain = std::move(b).build();
  std::vector<std::size_t> rows(chain.num_states());
  for (std::size_t x = 0; x < rows.size(); ++x) rows[x] = x;
  ValueVec v = evaluate_rows(chain, rows, 1.0, 0.0, opts);
  for (double& p : v) p = std::clamp(p, 0.0, 1.0);
  return v;
}

double failure_probability(const Mdp& mdp, const StationaryPolicy& policy, StateId x0,
                           const SolveOptions& opts) {
  if (x0 == kTerminal) return 0.0;
  return 1.0 - reach_probability(mdp, policy, opts).at(x0);
}

ValueVec discounted_failure_vector(const Mdp& mdp, const StationaryPolicy& policy, double gamma,
                                   const SolveOptions& opts) {
  check_unit_interval(gamma, "gamma", false);
  const CostModel chain = induced_chain(mdp, policy, gamma);
  std::vector<std::size_t> rows(chain.num_states());
  for (std::size_t x = 0; x < rows.size(); ++x) rows[x] = x;
  ValueVec v = evaluate_rows(chain, rows, 0.0, 1.0 - gamma, opts);
  for (double& l : v) l = std::clamp(l, 0.0, 1.0);
  return v;
}

double discounted_failure_measure(const Mdp& mdp, const StationaryPolicy& policy, StateId x0,
                                  double gamma, const SolveOptions& opts) {
  if (x0 == kTerminal) return 0.0;
  return discounted_failure_vector(mdp, policy, gamma, opts).at(x0);
}

}  // namespace ccssp
