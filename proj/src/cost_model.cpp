#include "ccssp/cost_model.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ccssp/errors.hpp"
#include "ccssp/numeric.hpp"

namespace ccssp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Rows whose total mass is within this of 1 count as non-leaking.
constexpr double kMassTol = 1e-12;

bool near_tie(double a, double best) { return a <= best + 1e-12 * (1.0 + std::abs(best)); }

double row_q(const CostModel& m, std::size_t r, double w_obj, double w_cond, const ValueVec& v) {
  CompensatedSum s;
  const double imm = w_obj * m.obj(r) + w_cond * m.cond(r);
  s.add(imm);
  const auto w = m.weights(r);
  const auto nx = m.successors(r);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double vn = v[nx[i]];
    if (vn == kInf) return kInf;
    s.add(w[i] * vn);
  }
  return s.value();
}

double row_mass(const CostModel& m, std::size_t r) {
  double total = 0.0;
  for (double w : m.weights(r)) total += w;
  return total;
}

// Solves (I - W) v = b on one block where W holds the in-block weights of
// the chosen rows and b already contains immediate costs plus out-of-block
// contributions. Returns false if the factorization fails.
bool direct_block_solve(const CostModel& m, std::span<const std::int32_t> block,
                        const std::vector<std::size_t>& rows, const std::vector<std::int32_t>& local,
                        const std::vector<double>& rhs, std::vector<double>& sol) {
  using SpMat = Eigen::SparseMatrix<double>;
  const auto n = static_cast<Eigen::Index>(block.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(block.size() * 4);
  for (std::size_t i = 0; i < block.size(); ++i) {
    const std::int32_t x = block[i];
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    const std::size_t r = rows[x];
    const auto w = m.weights(r);
    const auto nx = m.successors(r);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const std::int32_t j = local[nx[k]];
      if (j >= 0) trip.emplace_back(static_cast<int>(i), j, -w[k]);
    }
  }
  SpMat a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) return false;
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) return false;
  sol.assign(x.data(), x.data() + n);
  return true;
}

// Exact value of a fixed row choice on one block whose chain leaks mass, so
// that (I - W) is nonsingular. Out-of-block values must already be final.
void evaluate_block(const CostModel& m, std::span<const std::int32_t> block,
                    const std::vector<std::size_t>& rows, double w_obj, double w_cond,
                    std::vector<std::int32_t>& local, ValueVec& v, const SolveOptions& opts) {
  for (std::size_t i = 0; i < block.size(); ++i) local[block[i]] = static_cast<std::int32_t>(i);
  std::vector<double> rhs(block.size());
  bool infinite = false;
  for (std::size_t i = 0; i < block.size(); ++i) {
    const std::size_t r = rows[block[i]];
    CompensatedSum s;
    s.add(w_obj * m.obj(r) + w_cond * m.cond(r));
    const auto w = m.weights(r);
    const auto nx = m.successors(r);
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (local[nx[k]] >= 0) continue;
      if (v[nx[k]] == kInf) infinite = true;
      else s.add(w[k] * v[nx[k]]);
    }
    rhs[i] = s.value();
  }
  if (infinite) {
    for (auto x : block) v[x] = kInf;
  } else if (block.size() <= opts.direct_limit) {
    std::vector<double> sol;
    if (!direct_block_solve(m, block, rows, local, rhs, sol)) {
      for (auto x : block) local[x] = -1;
      throw SolveFailure("sparse factorization failed on a block of " +
                         std::to_string(block.size()) + " states");
    }
    for (std::size_t i = 0; i < block.size(); ++i) v[block[i]] = sol[i];
  } else {
    for (std::size_t it = 0;; ++it) {
      if (it >= opts.max_iters) {
        for (auto x : block) local[x] = -1;
        throw MaxItersExceeded("policy evaluation did not converge");
      }
      double res = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < block.size(); ++i) {
        const std::int32_t x = block[i];
        const std::size_t r = rows[x];
        CompensatedSum s;
        s.add(rhs[i]);
        const auto w = m.weights(r);
        const auto nx = m.successors(r);
        for (std::size_t k = 0; k < w.size(); ++k) {
          if (local[nx[k]] >= 0) s.add(w[k] * v[nx[k]]);
        }
        const double nv = s.value();
        res = std::max(res, std::abs(nv - v[x]));
        scale = std::max(scale, std::abs(nv));
        v[x] = nv;
      }
      if (res <= opts.vi_tol * scale) break;
    }
  }
  for (auto x : block) local[x] = -1;
}

// Closed block: no mass leaves. Zero cost gives 0, anything else diverges.
bool block_is_closed(const CostModel& m, std::span<const std::int32_t> block,
                     const std::vector<std::size_t>& rows, const std::vector<std::int32_t>& comp,
                     std::int32_t id) {
  for (auto x : block) {
    const std::size_t r = rows[x];
    if (row_mass(m, r) < 1.0 - kMassTol) return false;
    for (auto nx : m.successors(r)) {
      if (comp[nx] != id) return false;
    }
  }
  return true;
}

}  // namespace

CostModelBuilder::CostModelBuilder(std::size_t expected_states) {
  model_.state_rows_.reserve(expected_states + 1);
}

StateId CostModelBuilder::open_state() {
  model_.state_rows_.push_back(model_.obj_.size());
  return static_cast<StateId>(model_.state_rows_.size() - 2);
}

void CostModelBuilder::add_row(double obj, double cond, std::int64_t tag) {
  if (model_.state_rows_.size() < 2) throw ConfigInvalid("add_row before open_state");
  model_.obj_.push_back(obj);
  model_.cond_.push_back(cond);
  model_.tag_.push_back(tag);
  model_.row_entries_.push_back(model_.weight_.size());
  ++model_.state_rows_.back();
}

void CostModelBuilder::add_successor(double weight, StateId next) {
  if (model_.obj_.empty()) throw ConfigInvalid("add_successor before add_row");
  if (weight <= 0.0) return;
  const std::size_t begin = model_.row_entries_[model_.row_entries_.size() - 2];
  for (std::size_t i = begin; i < model_.next_.size(); ++i) {
    if (model_.next_[i] == next) {
      model_.weight_[i] += weight;
      return;
    }
  }
  model_.weight_.push_back(weight);
  model_.next_.push_back(next);
  ++model_.row_entries_.back();
}

CostModel CostModelBuilder::build() && {
  CostModel m = std::move(model_);
  const std::size_t n = m.num_states();
  for (std::size_t x = 0; x < n; ++x) {
    if (m.num_rows(static_cast<StateId>(x)) == 0) {
      throw ConfigInvalid("cost model state " + std::to_string(x) + " has no rows");
    }
  }
  Digraph g;
  g.offsets.reserve(n + 1);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t start = g.targets.size();
    for (std::size_t r = m.first_row(static_cast<StateId>(x)); r < m.end_row(static_cast<StateId>(x)); ++r) {
      for (auto nx : m.successors(r)) g.targets.push_back(nx);
    }
    std::sort(g.targets.begin() + static_cast<std::ptrdiff_t>(start), g.targets.end());
    g.targets.erase(std::unique(g.targets.begin() + static_cast<std::ptrdiff_t>(start), g.targets.end()),
                    g.targets.end());
    g.offsets.push_back(g.targets.size());
  }
  m.scc_ = strongly_connected_components(g);
  return m;
}

std::vector<std::size_t> local_choices(const CostModel& model, const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> out(rows.size());
  for (std::size_t x = 0; x < rows.size(); ++x) out[x] = rows[x] - model.first_row(static_cast<StateId>(x));
  return out;
}

namespace {

// Greedy row at x under v: lowest index among near-minimal rows.
std::size_t greedy_row(const CostModel& m, StateId x, double w_obj, double w_cond, const ValueVec& v,
                       double* best_out) {
  const std::size_t begin = m.first_row(x), end = m.end_row(x);
  double best = kInf;
  thread_local std::vector<double> q;
  q.resize(end - begin);
  for (std::size_t r = begin; r < end; ++r) {
    q[r - begin] = row_q(m, r, w_obj, w_cond, v);
    best = std::min(best, q[r - begin]);
  }
  std::size_t pick = begin;
  for (std::size_t r = begin; r < end; ++r) {
    if (near_tie(q[r - begin], best)) {
      pick = r;
      break;
    }
  }
  if (best_out) *best_out = best;
  return pick;
}

}  // namespace

GreedySolution solve_weighted(const CostModel& m, double w_obj, double w_cond, const SolveOptions& opts) {
  const std::size_t n = m.num_states();
  GreedySolution sol;
  sol.values.assign(n, 0.0);
  sol.rows.assign(n, 0);
  ValueVec& v = sol.values;
  const auto& scc = m.scc();
  std::vector<std::int32_t> local(n, -1);

  for (std::size_t c = 0; c < scc.num_components(); ++c) {
    const std::span<const std::int32_t> block(scc.members.data() + scc.offsets[c],
                                              scc.offsets[c + 1] - scc.offsets[c]);
    if (block.size() == 1) {
      // v = min_r (q_r + s_r v) has minimum solution min_r q_r / (1 - s_r).
      const StateId x = block[0];
      double best = kInf;
      thread_local std::vector<double> cand;
      cand.resize(m.num_rows(x));
      for (std::size_t r = m.first_row(x); r < m.end_row(x); ++r) {
        CompensatedSum s;
        s.add(w_obj * m.obj(r) + w_cond * m.cond(r));
        double self = 0.0;
        bool inf = false;
        const auto w = m.weights(r);
        const auto nx = m.successors(r);
        for (std::size_t k = 0; k < w.size(); ++k) {
          if (nx[k] == x) {
            self += w[k];
          } else if (v[nx[k]] == kInf) {
            inf = true;
          } else {
            s.add(w[k] * v[nx[k]]);
          }
        }
        const double q = s.value();
        double val;
        if (inf) val = kInf;
        else if (self < 1.0 - kMassTol) val = q / (1.0 - self);
        else val = q > 0.0 ? kInf : 0.0;
        cand[r - m.first_row(x)] = val;
        best = std::min(best, val);
      }
      std::size_t pick = m.first_row(x);
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (near_tie(cand[i], best)) {
          pick = m.first_row(x) + i;
          break;
        }
      }
      v[x] = best;
      sol.rows[x] = pick;
      continue;
    }

    bool leaking = true;
    for (auto x : block) {
      for (std::size_t r = m.first_row(x); r < m.end_row(x) && leaking; ++r) {
        if (row_mass(m, r) >= 1.0 - kMassTol) leaking = false;
      }
      if (!leaking) break;
    }

    // Gauss-Seidel sweeps from zero. For leaking blocks a few sweeps seed
    // policy iteration; otherwise sweep to convergence.
    const std::size_t seed_sweeps = leaking ? 4 : opts.max_iters;
    bool converged = false;
    for (std::size_t it = 0; it < seed_sweeps; ++it) {
      double res = 0.0, scale = 1.0;
      for (auto x : block) {
        double best;
        sol.rows[x] = greedy_row(m, x, w_obj, w_cond, v, &best);
        const double diff = (best == kInf && v[x] == kInf) ? 0.0 : std::abs(best - v[x]);
        res = std::max(res, diff);
        if (best != kInf) scale = std::max(scale, std::abs(best));
        v[x] = best;
      }
      if (res <= opts.vi_tol * scale) {
        converged = true;
        break;
      }
      if (!leaking && it + 1 == seed_sweeps) {
        throw MaxItersExceeded("value iteration exceeded " + std::to_string(opts.max_iters) + " sweeps");
      }
    }
    if (converged || !leaking) {
      for (auto x : block) sol.rows[x] = greedy_row(m, x, w_obj, w_cond, v, nullptr);
      continue;
    }

    // Policy iteration on the block.
    for (std::size_t it = 0;; ++it) {
      if (it >= 10'000) throw MaxItersExceeded("policy iteration did not stabilize");
      evaluate_block(m, block, sol.rows, w_obj, w_cond, local, v, opts);
      bool changed = false;
      for (auto x : block) {
        const double cur = v[x];
        double best;
        const std::size_t r = greedy_row(m, x, w_obj, w_cond, v, &best);
        if (best < cur - 1e-12 * (1.0 + std::abs(cur)) && r != sol.rows[x]) {
          sol.rows[x] = r;
          changed = true;
        }
      }
      if (!changed) break;
    }
    for (auto x : block) sol.rows[x] = greedy_row(m, x, w_obj, w_cond, v, nullptr);
  }
  return sol;
}

ValueVec evaluate_rows(const CostModel& m, const std::vector<std::size_t>& rows, double w_obj,
                       double w_cond, const SolveOptions& opts) {
  const std::size_t n = m.num_states();
  if (rows.size() != n) throw PolicyModelMismatch("row choice size does not match the model");
  Digraph g;
  g.offsets.reserve(n + 1);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t r = rows[x];
    if (r < m.first_row(static_cast<StateId>(x)) || r >= m.end_row(static_cast<StateId>(x))) {
      throw PolicyModelMismatch("row " + std::to_string(r) + " does not belong to state " + std::to_string(x));
    }
    for (auto nx : m.successors(r)) g.targets.push_back(nx);
    g.offsets.push_back(g.targets.size());
  }
  const SccDecomposition scc = strongly_connected_components(g);
  ValueVec v(n, 0.0);
  std::vector<std::int32_t> local(n, -1);
  for (std::size_t c = 0; c < scc.num_components(); ++c) {
    const std::span<const std::int32_t> block(scc.members.data() + scc.offsets[c],
                                              scc.offsets[c + 1] - scc.offsets[c]);
    if (block_is_closed(m, block, rows, scc.component, static_cast<std::int32_t>(c))) {
      bool positive = false;
      for (auto x : block) positive = positive || (w_obj * m.obj(rows[x]) + w_cond * m.cond(rows[x]) > 0.0);
      for (auto x : block) v[x] = positive ? kInf : 0.0;
      continue;
    }
    if (block.size() == 1) {
      const StateId x = block[0];
      const std::size_t r = rows[x];
      CompensatedSum s;
      s.add(w_obj * m.obj(r) + w_cond * m.cond(r));
      double self = 0.0;
      bool inf = false;
      const auto w = m.weights(r);
      const auto nx = m.successors(r);
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (nx[k] == x) self += w[k];
        else if (v[nx[k]] == kInf) inf = true;
        else s.add(w[k] * v[nx[k]]);
      }
      v[x] = inf ? kInf : s.value() / (1.0 - self);
      continue;
    }
    evaluate_block(m, block, rows, w_obj, w_cond, local, v, opts);
  }
  return v;
}

}  // namespace ccssp
