#pragma once

#include <vector>

#include "ccssp/game_solver.hpp"
#include "ccssp/mdp.hpp"
#include "ccssp/policy.hpp"
#include "ccssp/reachability.hpp"

namespace ccssp {

/// Model restricted to actions that preserve the maximal reach probability.
struct RestrictedMdp {
  Mdp mdp;
  /// original_action[x][k] is the original index of restricted action k at x.
  std::vector<std::vector<ActionId>> original_action;
};

/// Keeps u at x iff sum_x' p(x'|x,u) p_max(x') >= p_max(x) - tol.
RestrictedMdp restrict_maxprob(const Mdp& mdp, const ValueVec& p_max, double tol = 1e-9);

struct S3pMaxResult {
  StationaryPolicy policy;    // on the original model
  double conditional_cost = 0.0;
  ValueVec conditional_values;
};

/// Minimizes expected cost given success among max-probability policies,
/// via the success-conditioned chain p(x'|x,u) p_max(x') / p_max(x).
S3pMaxResult solve_s3p_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0,
                           const SolveOptions& opts = {});

struct McmpMaxResult {
  LabeledPolicy policy;  // on the original model's label augmentation
  double cost = 0.0;     // discounted cost until failure is certain
  double j_cond = 0.0;   // discounted failure measure of the policy
};

/// Cost-until-failure optimum among max-probability policies. Failure may
/// only be declared at dead-ends, which keeps the policy inside that class.
McmpMaxResult solve_mcmp_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0, double gamma,
                             const SolveOptions& opts = {});

/// Report wrappers used by the command line.
SolveReport report_s3p_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0, double gamma);
SolveReport report_mcmp_max(const Mdp& mdp, const ReachAnalysis& analysis, StateId x0, double gamma);

}  // namespace ccssp
