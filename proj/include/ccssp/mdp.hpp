#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ccssp {

using StateId = std::int32_t;
using ActionId = std::int32_t;

inline constexpr StateId kTerminal = 0;
inline constexpr ActionId kNoAction = -1;

using ValueVec = std::vector<double>;

/// One disturbance outcome of taking an action: probability, successor and
/// one-stage cost collapsed into a single entry.
struct Outcome {
  double prob = 0.0;
  StateId next = 0;
  double cost = 0.0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Finite MDP with terminal state 0. Actions are indexed 0..k-1 per state.
/// Storage is compressed: one row per (state, action), one outcome list per row.
class Mdp {
 public:
  Mdp() = default;

  /// Builds from a dense [state][action][outcome] table.
  static Mdp from_table(double cost_resolution,
                        const std::vector<std::vector<std::vector<Outcome>>>& table);

  std::size_t num_states() const noexcept { return state_rows_.size() - 1; }
  std::size_t num_rows() const noexcept { return row_outcomes_.size() - 1; }
  std::size_t num_outcomes() const noexcept { return outcomes_.size(); }
  double cost_resolution() const noexcept { return cost_resolution_; }

  std::size_t num_actions(StateId x) const {
    return state_rows_[x + 1] - state_rows_[x];
  }
  std::size_t row_index(StateId x, ActionId u) const { return state_rows_[x] + u; }
  std::size_t first_row(StateId x) const { return state_rows_[x]; }

  std::span<const Outcome> row(std::size_t r) const {
    return {outcomes_.data() + row_outcomes_[r], row_outcomes_[r + 1] - row_outcomes_[r]};
  }
  std::span<const Outcome> outcomes(StateId x, ActionId u) const { return row(row_index(x, u)); }

  /// Σ_w p(w|x,u) g(x,u,w).
  double expected_cost(StateId x, ActionId u) const;

  friend bool operator==(const Mdp&, const Mdp&) = default;

 private:
  friend class MdpBuilder;

  double cost_resolution_ = 1.0;
  std::vector<std::size_t> state_rows_{0};
  std::vector<std::size_t> row_outcomes_{0};
  std::vector<Outcome> outcomes_;
};

class MdpBuilder {
 public:
  MdpBuilder(std::size_t n_states, double cost_resolution);

  /// Appends an action to state x; returns its index within x.
  ActionId add_action(StateId x, std::vector<Outcome> outcomes);

  std::size_t num_states() const noexcept { return rows_.size(); }

  Mdp build() &&;

 private:
  double cost_resolution_;
  std::vector<std::vector<std::vector<Outcome>>> rows_;
};

/// Lists every violated model invariant; empty means valid.
std::vector<std::string> validate_mdp(const Mdp& mdp);

/// Deterministic (one action per state) or randomized stationary policy.
class StationaryPolicy {
 public:
  StationaryPolicy() = default;

  static StationaryPolicy deterministic(std::vector<ActionId> actions);
  static StationaryPolicy randomized(std::vector<std::vector<double>> distributions);

  bool is_deterministic() const noexcept { return distributions_.empty(); }
  std::size_t num_states() const noexcept {
    return is_deterministic() ? actions_.size() : distributions_.size();
  }

  ActionId action(StateId x) const;
  /// Probability of each admissible action at x (a one-hot vector for
  /// deterministic policies is not materialized; use choices()).
  std::vector<std::pair<ActionId, double>> choices(StateId x) const;
  ActionId sample(StateId x, double u01) const;

  const std::vector<ActionId>& actions() const noexcept { return actions_; }
  const std::vector<std::vector<double>>& distributions() const noexcept { return distributions_; }

  /// Throws PolicyModelMismatch if the policy does not fit the model.
  void check_compatible(const Mdp& mdp) const;

  friend bool operator==(const StationaryPolicy&, const StationaryPolicy&) = default;

 private:
  std::vector<ActionId> actions_;
  std::vector<std::vector<double>> distributions_;
};

}  // namespace ccssp
