#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccssp/mdp.hpp"
#include "ccssp/scc.hpp"

namespace ccssp {

/// Finite model with two cost channels and substochastic rows. Each row
/// belongs to one state and carries an immediate objective cost, an
/// immediate constraint cost, an opaque action tag and weighted successors.
/// Missing row mass flows to an implicit zero-value sink.
///
/// Every model solved by the game layer is one of these: discounting,
/// boundary values and terminal-entry costs are folded into row data.
class CostModel {
 public:
  CostModel() = default;

  std::size_t num_states() const noexcept { return state_rows_.size() - 1; }
  std::size_t num_rows() const noexcept { return obj_.size(); }
  std::size_t num_entries() const noexcept { return weight_.size(); }

  std::size_t first_row(StateId x) const { return state_rows_[x]; }
  std::size_t end_row(StateId x) const { return state_rows_[x + 1]; }
  std::size_t num_rows(StateId x) const { return end_row(x) - first_row(x); }

  double obj(std::size_t r) const { return obj_[r]; }
  double cond(std::size_t r) const { return cond_[r]; }
  std::int64_t tag(std::size_t r) const { return tag_[r]; }
  std::span<const double> weights(std::size_t r) const {
    return {weight_.data() + row_entries_[r], row_entries_[r + 1] - row_entries_[r]};
  }
  std::span<const StateId> successors(std::size_t r) const {
    return {next_.data() + row_entries_[r], row_entries_[r + 1] - row_entries_[r]};
  }

  /// Components of the union graph over all rows, sinks first.
  const SccDecomposition& scc() const noexcept { return scc_; }

  friend bool operator==(const CostModel& a, const CostModel& b) {
    return a.state_rows_ == b.state_rows_ && a.obj_ == b.obj_ && a.cond_ == b.cond_ &&
           a.tag_ == b.tag_ && a.row_entries_ == b.row_entries_ && a.weight_ == b.weight_ &&
           a.next_ == b.next_;
  }

 private:
  friend class CostModelBuilder;

  std::vector<std::size_t> state_rows_{0};
  std::vector<double> obj_, cond_;
  std::vector<std::int64_t> tag_;
  std::vector<std::size_t> row_entries_{0};
  std::vector<double> weight_;
  std::vector<StateId> next_;
  SccDecomposition scc_;
};

/// Rows are appended to the most recently opened state. Successor entries
/// with the same target within one row are merged.
class CostModelBuilder {
 public:
  explicit CostModelBuilder(std::size_t expected_states = 0);

  StateId open_state();
  void add_row(double obj, double cond, std::int64_t tag);
  void add_successor(double weight, StateId next);

  std::size_t num_states() const noexcept { return model_.state_rows_.size() - 1; }

  CostModel build() &&;

 private:
  CostModel model_;
};

struct SolveOptions {
  double vi_tol = 1e-9;
  std::size_t max_iters = 1'000'000;
  // Components up to this size are solved with a sparse direct method.
  std::size_t direct_limit = 100'000;
};

/// Minimum fixed point of v = min_r [w_obj*obj + w_cond*cond + sum w v'],
/// with the greedy row per state (lowest index among ties).
struct GreedySolution {
  ValueVec values;
  std::vector<std::size_t> rows;
};

GreedySolution solve_weighted(const CostModel& model, double w_obj, double w_cond,
                              const SolveOptions& opts = {});

/// Value of the chain that uses rows[x] at every state. States trapped in a
/// closed class with positive cost get +infinity.
ValueVec evaluate_rows(const CostModel& model, const std::vector<std::size_t>& rows,
                       double w_obj, double w_cond, const SolveOptions& opts = {});

/// Row-local index of each chosen global row (the action position within the state).
std::vector<std::size_t> local_choices(const CostModel& model,
                                       const std::vector<std::size_t>& rows);

}  // namespace ccssp
