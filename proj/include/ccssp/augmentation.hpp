#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ccssp/cost_model.hpp"
#include "ccssp/mdp.hpp"
#include "ccssp/reachability.hpp"

namespace ccssp {

/// Accumulated-cost levels below the cap, stored as integer multiples of delta.
class CostLevelGrid {
 public:
  CostLevelGrid() = default;
  CostLevelGrid(double delta, double cap, std::vector<std::int64_t> units);

  double delta() const noexcept { return delta_; }
  double cap() const noexcept { return cap_; }
  std::size_t size() const noexcept { return units_.size(); }
  const std::vector<std::int64_t>& units() const noexcept { return units_; }
  double level(std::size_t i) const { return static_cast<double>(units_[i]) * delta_; }

  /// Converts a cost to grid units (rounding to the nearest multiple).
  std::int64_t to_units(double cost) const;
  /// Level index of an accumulated cost in units, or nullopt if it is at or
  /// above the cap or not on the grid.
  std::optional<std::size_t> index_of(std::int64_t units) const;
  bool below_cap(std::int64_t units) const;

  friend bool operator==(const CostLevelGrid& a, const CostLevelGrid& b) {
    return a.delta_ == b.delta_ && a.cap_ == b.cap_ && a.units_ == b.units_;
  }

 private:
  double delta_ = 1.0;
  double cap_ = 1.0;
  std::vector<std::int64_t> units_;
  std::unordered_map<std::int64_t, std::size_t> lookup_;
};

/// Forward closure of reachable accumulated costs from 0 under all actions,
/// stopping at the cap. Throws GridExplosion past max_levels.
CostLevelGrid cost_levels(const Mdp& mdp, double cap, std::size_t max_levels = 1'000'000);

/// Cost-level augmentation for the conditional-cost objective.
///
/// States are (x, level) for x != 0, indexed (x-1)*L + level. Entering the
/// terminal from (x, r) costs gamma*p*(r+g) on the objective channel; every
/// non-terminal step costs (1-gamma) on the constraint channel; in-grid
/// successors carry weight gamma*p. Transitions whose new total reaches the
/// cap end in the fallback boundary value: objective gamma*p*(r'*a(x') + b(x'))
/// and constraint gamma*p*L(x'), with a, b, L evaluated under the fallback.
struct AugmentedS {
  CostModel model;
  CostLevelGrid grid;
  double gamma = 0.0;
  std::size_t base_states = 0;
  StationaryPolicy fallback;
  ValueVec fallback_reach;     // a(x)
  ValueVec fallback_cost;      // b(x) = E[cost * 1{reach}]
  ValueVec fallback_failure;   // L_d^gamma(x) under the fallback

  /// Augmented index of (x, level); x must be nonzero.
  StateId index(StateId x, std::size_t level) const {
    return static_cast<StateId>(static_cast<std::size_t>(x - 1) * grid.size() + level);
  }
  StateId base_state(StateId aug) const {
    return static_cast<StateId>(static_cast<std::size_t>(aug) / grid.size() + 1);
  }
  std::size_t level_of(StateId aug) const { return static_cast<std::size_t>(aug) % grid.size(); }
};

struct BuildSOptions {
  std::size_t max_levels = 1'000'000;
  double minprob_tol = 1e-9;
};

AugmentedS build_s(const Mdp& mdp, double gamma, double cap, const StationaryPolicy& fallback,
                   const ValueVec& p_min, const BuildSOptions& opts = {});

/// Label augmentation for the cost-until-failure objective.
///
/// States: (x, s) -> x, (x, f) -> n + x, artificial terminal -> 2n.
/// Row tags encode (u, j) as 2*u + j with j = 1 for a failure declaration.
struct AugmentedM {
  CostModel model;
  double gamma = 0.0;
  std::size_t base_states = 0;
  std::vector<bool> attention;
  std::vector<ActionId> stay_action;

  StateId index(StateId x, bool failed) const {
    return static_cast<StateId>(failed ? base_states + static_cast<std::size_t>(x) : static_cast<std::size_t>(x));
  }
  StateId artificial() const { return static_cast<StateId>(2 * base_states); }
  std::size_t num_states() const { return 2 * base_states + 1; }
};

inline std::int64_t label_tag(ActionId u, bool declare) { return 2 * static_cast<std::int64_t>(u) + (declare ? 1 : 0); }
inline ActionId tag_action(std::int64_t tag) { return static_cast<ActionId>(tag / 2); }
inline bool tag_declares(std::int64_t tag) { return (tag % 2) != 0; }

AugmentedM build_m(const Mdp& mdp, double gamma, const std::vector<bool>& attention,
                   const std::vector<ActionId>& stay_action);
AugmentedM build_m(const Mdp& mdp, double gamma, const ReachAnalysis& analysis);

/// Discount realized as termination: every off-terminal row is scaled by
/// gamma and sends 1-gamma to state 0. The leak entry carries the row's
/// expected cost, so total cost on the result equals discounted cost on the
/// input. Rows of state 0 are unchanged.
Mdp gamma_leak(const Mdp& mdp, double gamma);

}  // namespace ccssp
