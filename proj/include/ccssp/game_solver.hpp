#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ccssp/augmentation.hpp"
#include "ccssp/cost_model.hpp"
#include "ccssp/mdp.hpp"
#include "ccssp/policy.hpp"
#include "ccssp/reachability.hpp"

namespace ccssp {

enum class Objective { s3p, mcmp };

const char* to_string(Objective o);

struct GameConfig {
  double gamma = 0.999;
  double epsilon = 0.05;
  double cap = 50.0;  // cost cap M, conditional-cost case only
  double vi_tol = 1e-9;
  double c_tol = 1e-6;       // relative bracket width for c*
  double alpha_tol = 1e-4;   // golden-section width
  double delta = 1e-3;       // belief offset for the two mixed policies
  int eps_grid_size = 20;    // log-spaced budgets over [eps/100, eps]
  int eps_refine = 5;
  double c_max = 1e12;
  std::size_t max_iters = 1'000'000;
  std::size_t max_levels = 1'000'000;

  SolveOptions solve_options() const;
  /// Throws ConfigInvalid on out-of-range values.
  void validate() const;
};

/// Posterior weight of the objective model after one step:
/// alpha / (alpha + gamma (1 - alpha)).
double belief_update(double alpha, double gamma);

/// eta(eps; c): c(1-eps) for the conditional-cost case, c otherwise.
double eta(Objective objective, double c, double epsilon);

/// Per-step weights of the scalarized game at belief alpha_hat:
/// alpha_hat on the objective channel, eta/eps (1 - alpha_hat) on the constraint.
std::pair<double, double> game_weights(Objective objective, double alpha_hat, double c, double epsilon);

/// Value iteration of the belief-weighted operator from zero.
GreedySolution weighted_vi(const CostModel& model, Objective objective, double alpha_hat, double c,
                           double epsilon, const SolveOptions& opts = {});

struct InnerResult {
  double alpha_hat = 0.0;
  double value = 0.0;  // alpha_hat J_obj + eta/eps (1-alpha_hat) J_cond at the start
  double j_obj = 0.0;
  double j_cond = 0.0;
  std::vector<std::size_t> rows;
};

/// Value at the augmented start state, plus the two channel values of the
/// greedy policy there.
InnerResult inner_value(const CostModel& model, StateId start, Objective objective, double alpha_hat,
                        double c, double epsilon, const SolveOptions& opts = {});

/// Every policy seen so far as a line (J_obj, J_cond); reused across c and
/// budgets because neither channel depends on them.
class LineCache {
 public:
  void add(double j_obj, double j_cond);
  /// max over alpha of min over cached lines; returns (value, argmax).
  std::pair<double, double> envelope_max(double k) const;
  std::size_t size() const noexcept { return lines_.size(); }

 private:
  std::vector<std::pair<double, double>> lines_;
};

struct AlphaSearch {
  double alpha_star = 1.0;
  double value = 0.0;
  InnerResult minus;  // greedy at clamp(alpha* - delta)
  InnerResult plus;   // greedy at clamp(alpha* + delta)
  std::size_t evaluations = 0;
};

/// Golden-section search of the concave map alpha_hat -> inner value,
/// polished by cutting planes from the policy lines found on the way.
AlphaSearch maximize_alpha(const CostModel& model, StateId start, Objective objective, double c,
                           double epsilon, const GameConfig& config, LineCache* cache = nullptr);

struct MixResult {
  double weight_minus = 1.0;
  double value = 0.0;
};

/// Closed-form 2x2 matrix game: min over w of
/// max{w Jo- + (1-w) Jo+, eta/eps (w Jc- + (1-w) Jc+)}. Ties keep w = 1.
MixResult mix_two(double j_obj_minus, double j_cond_minus, double j_obj_plus, double j_cond_plus, double c,
                  double epsilon, Objective objective);

/// Smallest c with max-min value <= eta(eps; c), by doubling then bisection.
/// Throws Infeasible when no policy meets the budget.
double find_c_star(const CostModel& model, StateId start, Objective objective, double epsilon,
                   const GameConfig& config, LineCache* cache = nullptr);

struct ComponentReport {
  double weight = 0.0;
  ComponentPolicy policy;
  double alpha_hat = 0.0;
  double j_obj = 0.0;
  double j_cond = 0.0;
  /// Conditional-cost estimate J_obj / (1 - J_cond); conditional-cost case only.
  double j_s3p = 0.0;
};

struct SolveReport {
  std::string method;  // "s3p", "mcmp", "s3p-max", "mcmp-max"
  Objective objective = Objective::mcmp;
  StateId start = 1;
  double gamma = 0.0;
  double epsilon = 0.0;
  double cap = 0.0;
  double c_star = 0.0;
  double eps_star = 0.0;
  double alpha_star = 0.0;
  double minimax_value = 0.0;
  double min_failure_measure = 0.0;
  std::vector<ComponentReport> components;
  double mixture_j_obj = 0.0;
  double mixture_j_cond = 0.0;
  double objective_value = 0.0;
  bool feasible = false;
  std::vector<std::pair<double, double>> eps_sweep;  // (eps', c*(eps'))

  /// Executable policy: the single component or a mixture.
  Policy policy() const;
};

/// Full constrained solve from base state x0.
SolveReport solve(const Mdp& mdp, StateId x0, Objective objective, const GameConfig& config,
                  const ReachAnalysis& analysis);

}  // namespace ccssp
