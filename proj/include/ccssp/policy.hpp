#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "ccssp/augmentation.hpp"
#include "ccssp/mdp.hpp"

namespace ccssp {

/// Stationary policy on (state, accumulated-cost level). Beyond the cap the
/// fallback decides.
struct CostAugmentedPolicy {
  CostLevelGrid grid;
  std::size_t base_states = 0;
  std::vector<ActionId> table;  // (x-1)*levels + level, x >= 1
  StationaryPolicy fallback;

  ActionId action(StateId x, std::int64_t cost_units) const;

  friend bool operator==(const CostAugmentedPolicy&, const CostAugmentedPolicy&) = default;
};

/// Stationary policy on (state, label). Entries are row tags: 2*u + declare.
struct LabeledPolicy {
  std::size_t base_states = 0;
  std::vector<std::int64_t> table;  // size 2n+1, indexed like AugmentedM

  std::int64_t tag(StateId x, bool failed) const {
    return table.at(failed ? base_states + static_cast<std::size_t>(x) : static_cast<std::size_t>(x));
  }

  friend bool operator==(const LabeledPolicy&, const LabeledPolicy&) = default;
};

using ComponentPolicy = std::variant<StationaryPolicy, CostAugmentedPolicy, LabeledPolicy>;

struct MixedComponent {
  double weight = 0.0;
  ComponentPolicy policy;

  friend bool operator==(const MixedComponent&, const MixedComponent&) = default;
};

/// Episode-start randomization over component policies.
struct MixedPolicy {
  std::vector<MixedComponent> components;

  friend bool operator==(const MixedPolicy&, const MixedPolicy&) = default;
};

using Policy = std::variant<StationaryPolicy, CostAugmentedPolicy, LabeledPolicy, MixedPolicy>;

/// Turns the greedy rows of a solved augmented model into a policy.
CostAugmentedPolicy make_cost_augmented(const AugmentedS& aug, const std::vector<std::size_t>& rows);
LabeledPolicy make_labeled(const AugmentedM& aug, const std::vector<std::size_t>& rows);

/// Row choice in the augmented model that reproduces a stored policy.
std::vector<std::size_t> rows_of(const AugmentedS& aug, const CostAugmentedPolicy& policy);
std::vector<std::size_t> rows_of(const AugmentedM& aug, const LabeledPolicy& policy);

/// Lifts a base stationary deterministic policy to the augmented models
/// (never declaring failure in the label model).
std::vector<std::size_t> lift_rows(const AugmentedS& aug, const StationaryPolicy& policy);
std::vector<std::size_t> lift_rows(const AugmentedM& aug, const StationaryPolicy& policy);

/// Throws PolicyModelMismatch unless every action the policy can emit is
/// admissible in the model.
void check_policy(const Mdp& mdp, const Policy& policy);

/// Executes a policy online, tracking accumulated cost or label as needed.
/// A mixed policy commits to one component at construction. The runner
/// refers to the policy, which must outlive it.
class PolicyRunner {
 public:
  /// `u01` picks the mixture component; ignored for non-mixed policies.
  PolicyRunner(const Policy& policy, double cost_resolution, double u01);

  /// Action at base state x. `u01` feeds randomized stationary policies.
  ActionId act(StateId x, double u01);
  /// Records the one-stage cost of the step just taken.
  void observe(double cost);

  std::size_t component() const noexcept { return component_; }
  bool failure_declared() const noexcept { return failed_; }
  std::int64_t cost_units() const noexcept { return units_; }

 private:
  std::variant<const StationaryPolicy*, const CostAugmentedPolicy*, const LabeledPolicy*> active_;
  std::size_t component_ = 0;
  double delta_ = 1.0;
  std::int64_t units_ = 0;
  bool failed_ = false;
};

}  // namespace ccssp
