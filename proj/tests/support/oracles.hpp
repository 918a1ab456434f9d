#pragma once

// Brute-force reference computations. Everything here is dense and
// enumerative and shares no code with the library's solvers.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ccssp/mdp.hpp"

namespace oracle {

using ccssp::ActionId;
using ccssp::Mdp;
using ccssp::StateId;
using Matrix = std::vector<std::vector<double>>;
using Vector = std::vector<double>;

/// Gaussian elimination with partial pivoting; A is square.
inline Vector solve_dense(Matrix a, Vector b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Calls f on every deterministic stationary policy.
inline void for_each_policy(const Mdp& mdp, const std::function<void(const std::vector<ActionId>&)>& f) {
  const std::size_t n = mdp.num_states();
  std::vector<ActionId> pol(n, 0);
  for (;;) {
    f(pol);
    std::size_t i = 0;
    while (i < n) {
      if (static_cast<std::size_t>(++pol[i]) < mdp.num_actions(static_cast<StateId>(i))) break;
      pol[i] = 0;
      ++i;
    }
    if (i == n) return;
  }
}

inline Matrix transition_matrix(const Mdp& mdp, const std::vector<ActionId>& pol) {
  const std::size_t n = mdp.num_states();
  Matrix p(n, Vector(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    for (const auto& o : mdp.outcomes(static_cast<StateId>(x), pol[x])) p[x][static_cast<std::size_t>(o.next)] += o.prob;
  }
  return p;
}

/// States from which 0 is reachable in the policy's graph.
inline std::vector<bool> can_reach_goal(const Matrix& p) {
  const std::size_t n = p.size();
  std::vector<bool> ok(n, false);
  ok[0] = true;
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t x = 0; x < n; ++x) {
      if (ok[x]) continue;
      for (std::size_t y = 0; y < n; ++y) {
        if (p[x][y] > 0.0 && ok[y]) {
          ok[x] = grew = true;
          break;
        }
      }
    }
  }
  return ok;
}

/// Probability of reaching 0 from every state under a deterministic policy.
inline Vector reach(const Mdp& mdp, const std::vector<ActionId>& pol) {
  const Matrix p = transition_matrix(mdp, pol);
  const std::vector<bool> ok = can_reach_goal(p);
  std::vector<std::size_t> idx;
  for (std::size_t x = 1; x < p.size(); ++x) {
    if (ok[x]) idx.push_back(x);
  }
  Vector out(p.size(), 0.0);
  out[0] = 1.0;
  if (idx.empty()) return out;
  Matrix a(idx.size(), Vector(idx.size(), 0.0));
  Vector b(idx.size(), 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    a[i][i] = 1.0;
    b[i] = p[idx[i]][0];
    for (std::size_t j = 0; j < idx.size(); ++j) a[i][j] -= p[idx[i]][idx[j]];
  }
  const Vector v = solve_dense(a, b);
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = v[i];
  return out;
}

/// (1-gamma) sum_t gamma^t 1{x_t != 0}, per state.
inline Vector discounted_failure(const Mdp& mdp, const std::vector<ActionId>& pol, double gamma) {
  const Matrix p = transition_matrix(mdp, pol);
  const std::size_t n = p.size();
  Matrix a(n, Vector(n, 0.0));
  Vector b(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    a[x][x] = 1.0;
    if (x == 0) continue;
    b[x] = 1.0 - gamma;
    for (std::size_t y = 0; y < n; ++y) a[x][y] -= gamma * p[x][y];
  }
  return solve_dense(a, b);
}

/// E[T 1{T < inf}] with T the hitting time of 0.
inline Vector hitting_time_on_success(const Mdp& mdp, const std::vector<ActionId>& pol) {
  const Matrix p = transition_matrix(mdp, pol);
  const Vector r = reach(mdp, pol);
  std::vector<std::size_t> idx;
  for (std::size_t x = 1; x < p.size(); ++x) {
    if (r[x] > 0.0) idx.push_back(x);
  }
  Vector out(p.size(), 0.0);
  if (idx.empty()) return out;
  Matrix a(idx.size(), Vector(idx.size(), 0.0));
  Vector b(idx.size(), 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    a[i][i] = 1.0;
    b[i] = r[idx[i]];
    for (std::size_t j = 0; j < idx.size(); ++j) a[i][j] -= p[idx[i]][idx[j]];
  }
  const Vector v = solve_dense(a, b);
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = v[i];
  return out;
}

/// gamma-discounted expected total cost under a deterministic policy.
inline Vector discounted_cost(const Mdp& mdp, const std::vector<ActionId>& pol, double gamma) {
  const Matrix p = transition_matrix(mdp, pol);
  const std::size_t n = p.size();
  Matrix a(n, Vector(n, 0.0));
  Vector b(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    a[x][x] = 1.0;
    for (const auto& o : mdp.outcomes(static_cast<StateId>(x), pol[x])) b[x] += o.prob * o.cost;
    for (std::size_t y = 0; y < n; ++y) a[x][y] -= gamma * p[x][y];
  }
  return solve_dense(a, b);
}

struct ReachExtremes {
  Vector p_max, p_min;
};

inline ReachExtremes reach_extremes(const Mdp& mdp) {
  const std::size_t n = mdp.num_states();
  ReachExtremes e{Vector(n, -1.0), Vector(n, 2.0)};
  for_each_policy(mdp, [&](const std::vector<ActionId>& pol) {
    const Vector r = reach(mdp, pol);
    for (std::size_t x = 0; x < n; ++x) {
      e.p_max[x] = std::max(e.p_max[x], r[x]);
      e.p_min[x] = std::min(e.p_min[x], r[x]);
    }
  });
  return e;
}

/// min over w in [0,1] of max(w a0 + (1-w) b0, w a1 + (1-w) b1).
inline double min_max_two_lines(double a0, double a1, double b0, double b1) {
  auto v = [&](double w) { return std::max(w * a0 + (1 - w) * b0, w * a1 + (1 - w) * b1); };
  double best = std::min(v(0.0), v(1.0));
  const double d = (a0 - b0) - (a1 - b1);
  if (d != 0.0) {
    const double w = (b1 - b0) / d;
    if (w > 0.0 && w < 1.0) best = std::min(best, v(w));
  }
  return best;
}

}  // namespace oracle
