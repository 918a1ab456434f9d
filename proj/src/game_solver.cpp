#include "ccssp/game_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ccssp/errors.hpp"

namespace ccssp {

const char* to_string(Objective o) { return o == Objective::s3p ? "s3p" : "mcmp"; }

SolveOptions GameConfig::solve_options() const {
  SolveOptions o;
  o.vi_tol = vi_tol;
  o.max_iters = max_iters;
  return o;
}

void GameConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigInvalid(std::string(name) + " must be positive");
  };
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigInvalid("gamma must lie in (0,1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigInvalid("epsilon must lie in (0,1)");
  positive(cap, "cap");
  positive(vi_tol, "vi_tol");
  positive(c_tol, "c_tol");
  positive(alpha_tol, "alpha_tol");
  positive(delta, "delta");
  positive(c_max, "c_max");
  if (delta >= 0.5) throw ConfigInvalid("delta must be below 0.5");
  if (eps_grid_size < 2) throw ConfigInvalid("eps_grid_size must be at least 2");
  if (eps_refine < 0) throw ConfigInvalid("eps_refine must be non-negative");
}

double belief_update(double alpha, double gamma) {
  const double denom = alpha + gamma * (1.0 - alpha);
  if (denom <= 0.0) return 0.0;
  return alpha / denom;
}

double eta(Objective objective, double c, double epsilon) {
  return objective == Objective::s3p ? c * (1.0 - epsilon) : c;
}

std::pair<double, double> game_weights(Objective objective, double alpha_hat, double c, double epsilon) {
  return {alpha_hat, eta(objective, c, epsilon) / epsilon * (1.0 - alpha_hat)};
}

GreedySolution weighted_vi(const CostModel& model, Objective objective, double alpha_hat, double c,
                           double epsilon, const SolveOptions& opts) {
  const auto [wo, wc] = game_weights(objective, alpha_hat, c, epsilon);
  return solve_weighted(model, wo, wc, opts);
}

InnerResult inner_value(const CostModel& model, StateId start, Objective objective, double alpha_hat,
                        double c, double epsilon, const SolveOptions& opts) {
  GreedySolution g = weighted_vi(model, objective, alpha_hat, c, epsilon, opts);
  InnerResult r;
  r.alpha_hat = alpha_hat;
  r.value = g.values.at(start);
  r.j_obj = evaluate_rows(model, g.rows, 1.0, 0.0, opts)[start];
  r.j_cond = evaluate_rows(model, g.rows, 0.0, 1.0, opts)[start];
  r.rows = std::move(g.rows);
  return r;
}

void LineCache::add(double j_obj, double j_cond) {
  for (const auto& [o, c] : lines_) {
    if (o == j_obj && c == j_cond) return;
  }
  lines_.emplace_back(j_obj, j_cond);
}

std::pair<double, double> LineCache::envelope_max(double k) const {
  if (lines_.empty()) return {std::numeric_limits<double>::infinity(), 1.0};
  auto at = [&](double a) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [o, c] : lines_) m = std::min(m, a * o + k * (1.0 - a) * c);
    return m;
  };
  std::vector<double> cand{0.0, 1.0};
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    for (std::size_t j = i + 1; j < lines_.size(); ++j) {
      // a*o_i + k(1-a)c_i = a*o_j + k(1-a)c_j
      const double si = lines_[i].first - k * lines_[i].second;
      const double sj = lines_[j].first - k * lines_[j].second;
      if (si == sj) continue;
      const double a = k * (lines_[j].second - lines_[i].second) / (si - sj);
      if (a > 0.0 && a < 1.0) cand.push_back(a);
    }
  }
  std::sort(cand.begin(), cand.end());
  double best = -std::numeric_limits<double>::infinity(), arg = 1.0;
  for (double a : cand) {
    const double v = at(a);
    if (v > best) {
      best = v;
      arg = a;
    }
  }
  return {best, arg};
}

namespace {

bool tight(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

AlphaSearch maximize_alpha(const CostModel& model, StateId start, Objective objective, double c,
                           double epsilon, const GameConfig& config, LineCache* cache) {
  const SolveOptions opts = config.solve_options();
  LineCache local;
  LineCache& lines = cache ? *cache : local;
  std::map<double, InnerResult> memo;
  AlphaSearch out;
  auto f = [&](double a) -> const InnerResult& {
    auto it = memo.find(a);
    if (it != memo.end()) return it->second;
    InnerResult r = inner_value(model, start, objective, a, c, epsilon, opts);
    lines.add(r.j_obj, r.j_cond);
    ++out.evaluations;
    return memo.emplace(a, std::move(r)).first->second;
  };

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = f(x1).value, f2 = f(x2).value;
  while (b - a > config.alpha_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2).value;
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1).value;
    }
  }
  f(0.0);
  f(1.0);
  double best_a = 1.0, best_v = -std::numeric_limits<double>::infinity();
  for (const auto& [alpha, r] : memo) {
    if (r.value > best_v) {
      best_v = r.value;
      best_a = alpha;
    }
  }
  // Cutting-plane polish: the envelope of known policy lines bounds the
  // concave function from above; probe its peak until the bound is attained.
  const double k = eta(objective, c, epsilon) / epsilon;
  for (int it = 0; it < 100; ++it) {
    const auto [ub, arg] = lines.envelope_max(k);
    if (ub <= best_v || tight(ub, best_v)) break;
    if (memo.count(arg)) break;
    const double v = f(arg).value;
    if (v > best_v) {
      best_v = v;
      best_a = arg;
    }
  }
  out.alpha_star = best_a;
  out.value = best_v;
  const double lo = std::clamp(best_a - config.delta, 0.0, 1.0);
  const double hi = std::clamp(best_a + config.delta, 0.0, 1.0);
  out.minus = f(lo);
  out.plus = f(hi);
  return out;
}

MixResult mix_two(double jo_m, double jc_m, double jo_p, double jc_p, double c, double epsilon,
                  Objective objective) {
  const double k = eta(objective, c, epsilon) / epsilon;
  const double a0 = jo_m, a1 = k * jc_m, b0 = jo_p, b1 = k * jc_p;
  auto value = [&](double w) { return std::max(w * a0 + (1.0 - w) * b0, w * a1 + (1.0 - w) * b1); };
  std::vector<double> cand{1.0, 0.0};
  const double denom = (a0 - b0) - (a1 - b1);
  if (denom != 0.0) {
    const double w = (b1 - b0) / denom;
    if (w > 0.0 && w < 1.0) cand.push_back(w);
  }
  MixResult best{1.0, value(1.0)};
  for (double w : cand) {
    const double v = value(w);
    if (v < best.value && !tight(v, best.value)) best = {w, v};
  }
  return best;
}

namespace {

struct Bisection {
  double largest_false = -1.0;
  double smallest_true = std::numeric_limits<double>::infinity();

  void record(double c, bool ok) {
    if (ok) smallest_true = std::min(smallest_true, c);
    else largest_false = std::max(largest_false, c);
    if (largest_false > smallest_true) {
      throw MonotonicityViolation("feasibility predicate is not monotone in c: fails at " +
                                  std::to_string(largest_false) + " but holds at " + std::to_string(smallest_true));
    }
  }
};

// True iff the max-min value at c is at most eta(eps; c), decided with
// cutting planes over the cached lines.
bool predicate(const CostModel& model, StateId start, Objective objective, double c, double epsilon,
               const SolveOptions& opts, LineCache& lines) {
  const double bound = eta(objective, c, epsilon);
  const double slack = 1e-12 * (1.0 + bound);
  const double k = bound / epsilon;
  for (int it = 0; it < 1000; ++it) {
    const auto [ub, arg] = lines.envelope_max(k);
    if (ub <= bound + slack) return true;
    const InnerResult r = inner_value(model, start, objective, arg, c, epsilon, opts);
    lines.add(r.j_obj, r.j_cond);
    if (r.value > bound + slack) return false;
    if (tight(r.value, ub) || r.value >= ub) return r.value <= bound + slack;
  }
  throw MaxItersExceeded("cutting-plane feasibility test did not settle");
}

}  // namespace

double find_c_star(const CostModel& model, StateId start, Objective objective, double epsilon,
                   const GameConfig& config, LineCache* cache) {
  const SolveOptions opts = config.solve_options();
  LineCache local;
  LineCache& lines = cache ? *cache : local;
  const InnerResult safest = inner_value(model, start, objective, 0.0, 1.0, epsilon, opts);
  lines.add(safest.j_obj, safest.j_cond);
  if (safest.j_cond > epsilon * (1.0 + 1e-12)) {
    throw Infeasible("no policy meets the failure budget " + std::to_string(epsilon) +
                         "; smallest discounted failure measure is " + std::to_string(safest.j_cond),
                     safest.j_cond);
  }
  const InnerResult greedy = inner_value(model, start, objective, 1.0, 1.0, epsilon, opts);
  lines.add(greedy.j_obj, greedy.j_cond);

  Bisection track;
  auto probe = [&](double c) {
    const bool ok = predicate(model, start, objective, c, epsilon, opts, lines);
    track.record(c, ok);
    return ok;
  };
  // At c = 0 the constraint weight vanishes and the predicate holds for any
  // policy with zero objective, whatever its failure measure. The search
  // therefore approaches 0 from above and reports 0 only below a floor.
  constexpr double kFloor = 1e-9;
  double lo = 0.0, hi = 1.0;
  if (probe(hi)) {
    for (;;) {
      const double c = 0.5 * hi;
      if (c < kFloor) return 0.0;
      if (!probe(c)) {
        lo = c;
        break;
      }
      hi = c;
    }
  } else {
    lo = hi;
    for (;;) {
      hi *= 2.0;
      if (hi > config.c_max) throw BracketFailure("no feasible c found below " + std::to_string(config.c_max));
      if (probe(hi)) break;
      lo = hi;
    }
  }
  while (hi - lo > config.c_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

Policy SolveReport::policy() const {
  if (components.size() == 1) {
    return std::visit([](const auto& p) -> Policy { return p; }, components.front().policy);
  }
  MixedPolicy m;
  for (const auto& c : components) m.components.push_back({c.weight, c.policy});
  return m;
}

namespace {

struct Mixture {
  double w = 1.0;
  const InnerResult* first = nullptr;
  const InnerResult* second = nullptr;
};

double mix_cond(const Mixture& m) { return m.w * m.first->j_cond + (1.0 - m.w) * m.second->j_cond; }

// Weight on `risky` so that the mixture spends exactly the budget.
Mixture spend_budget(const InnerResult& risky, const InnerResult& safe, double budget) {
  Mixture m{1.0, &risky, &safe};
  if (risky.j_cond <= budget) return m;
  const double span = risky.j_cond - safe.j_cond;
  m.w = span > 0.0 ? std::clamp((budget - safe.j_cond) / span, 0.0, 1.0) : 0.0;
  return m;
}

// Mixes the two probes and, if rounding leaves the budget slightly
// exceeded, re-mixes to meet it exactly.
Mixture choose_mixture(const AlphaSearch& s, const InnerResult& safest, double c, double budget, Objective objective) {
  const MixResult mr = mix_two(s.minus.j_obj, s.minus.j_cond, s.plus.j_obj, s.plus.j_cond, c, budget, objective);
  Mixture m{mr.weight_minus, &s.minus, &s.plus};
  if (mix_cond(m) <= budget) return m;
  const InnerResult& lo = s.minus.j_cond <= s.plus.j_cond ? s.minus : s.plus;
  const InnerResult& hi = s.minus.j_cond <= s.plus.j_cond ? s.plus : s.minus;
  if (lo.j_cond <= budget) return spend_budget(hi, lo, budget);
  const InnerResult& cheap = s.minus.j_obj <= s.plus.j_obj ? s.minus : s.plus;
  return spend_budget(cheap, safest, budget);
}

template <class MakePolicy>
void fill_components(SolveReport& rep, const Mixture& m, Objective objective, MakePolicy make) {
  auto add = [&](double w, const InnerResult& r) {
    ComponentReport c;
    c.weight = w;
    c.policy = make(r.rows);
    c.alpha_hat = r.alpha_hat;
    c.j_obj = r.j_obj;
    c.j_cond = r.j_cond;
    c.j_s3p = objective == Objective::s3p ? r.j_obj / (1.0 - r.j_cond) : r.j_obj;
    rep.components.push_back(std::move(c));
  };
  const bool same = m.first->rows == m.second->rows;
  if (m.w >= 1.0 || same) {
    add(1.0, *m.first);
  } else if (m.w <= 0.0) {
    add(1.0, *m.second);
  } else {
    add(m.w, *m.first);
    add(1.0 - m.w, *m.second);
  }
  rep.mixture_j_obj = 0.0;
  rep.mixture_j_cond = 0.0;
  for (const auto& c : rep.components) {
    rep.mixture_j_obj += c.weight * c.j_obj;
    rep.mixture_j_cond += c.weight * c.j_cond;
  }
}

std::vector<double> budget_grid(double epsilon, int size) {
  std::vector<double> g(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    const double t = static_cast<double>(size - 1 - i) / static_cast<double>(size - 1);
    g[static_cast<std::size_t>(i)] = epsilon * std::pow(100.0, -t);
  }
  g.back() = epsilon;
  return g;
}

}  // namespace

SolveReport solve(const Mdp& mdp, StateId x0, Objective objective, const GameConfig& config,
                  const ReachAnalysis& analysis) {
  config.validate();
  if (x0 <= kTerminal || static_cast<std::size_t>(x0) >= mdp.num_states()) {
    throw ConfigInvalid("start state must be a non-terminal state of the model");
  }
  const SolveOptions opts = config.solve_options();
  SolveReport rep;
  rep.method = to_string(objective);
  rep.objective = objective;
  rep.start = x0;
  rep.gamma = config.gamma;
  rep.epsilon = config.epsilon;
  rep.cap = objective == Objective::s3p ? config.cap : 0.0;

  if (objective == Objective::mcmp) {
    const AugmentedM aug = build_m(mdp, config.gamma, analysis);
    const StateId start = aug.index(x0, false);
    LineCache lines;
    const double c = find_c_star(aug.model, start, objective, config.epsilon, config, &lines);
    const InnerResult safest = inner_value(aug.model, start, objective, 0.0, 1.0, config.epsilon, opts);
    const AlphaSearch s = maximize_alpha(aug.model, start, objective, c, config.epsilon, config, &lines);
    const Mixture m = choose_mixture(s, safest, c, config.epsilon, objective);
    rep.c_star = c;
    rep.eps_star = config.epsilon;
    rep.alpha_star = s.alpha_star;
    rep.minimax_value = s.value;
    rep.min_failure_measure = safest.j_cond;
    fill_components(rep, m, objective, [&](const std::vector<std::size_t>& rows) -> ComponentPolicy {
      return make_labeled(aug, rows);
    });
    rep.objective_value = c;
    rep.feasible = rep.mixture_j_cond <= config.epsilon + 1e-9;
    return rep;
  }

  BuildSOptions bo;
  bo.max_levels = config.max_levels;
  const AugmentedS aug = build_s(mdp, config.gamma, config.cap, analysis.minprob, analysis.p_min, bo);
  const StateId start = aug.index(x0, 0);
  LineCache lines;
  const InnerResult safest = inner_value(aug.model, start, objective, 0.0, 1.0, config.epsilon, opts);
  lines.add(safest.j_obj, safest.j_cond);
  rep.min_failure_measure = safest.j_cond;
  if (safest.j_cond > config.epsilon * (1.0 + 1e-12)) {
    throw Infeasible("no policy meets the failure budget " + std::to_string(config.epsilon) +
                         "; smallest discounted failure measure is " + std::to_string(safest.j_cond),
                     safest.j_cond);
  }

  double best_eps = -1.0, best_c = std::numeric_limits<double>::infinity();
  auto try_budget = [&](double e) {
    if (safest.j_cond > e * (1.0 + 1e-12)) return;
    const double c = find_c_star(aug.model, start, objective, e, config, &lines);
    rep.eps_sweep.emplace_back(e, c);
    if (c < best_c) {
      best_c = c;
      best_eps = e;
    }
  };
  const std::vector<double> grid = budget_grid(config.epsilon, config.eps_grid_size);
  for (double e : grid) try_budget(e);
  if (config.eps_refine > 0 && best_eps > 0.0) {
    const auto it = std::find(grid.begin(), grid.end(), best_eps);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double lo = i > 0 ? grid[i - 1] : std::max(best_eps * 0.5, safest.j_cond);
    const double hi = i + 1 < grid.size() ? grid[i + 1] : best_eps;
    if (hi > lo) {
      for (int k = 0; k < config.eps_refine; ++k) {
        const double t = static_cast<double>(k + 1) / static_cast<double>(config.eps_refine + 1);
        const double e = lo * std::pow(hi / lo, t);
        if (e != best_eps) try_budget(e);
      }
    }
  }
  std::sort(rep.eps_sweep.begin(), rep.eps_sweep.end());

  const AlphaSearch s = maximize_alpha(aug.model, start, objective, best_c, best_eps, config, &lines);
  const Mixture m = choose_mixture(s, safest, best_c, best_eps, objective);
  rep.c_star = best_c;
  rep.eps_star = best_eps;
  rep.alpha_star = s.alpha_star;
  rep.minimax_value = s.value;
  fill_components(rep, m, objective, [&](const std::vector<std::size_t>& rows) -> ComponentPolicy {
    return make_cost_augmented(aug, rows);
  });
  rep.objective_value = best_c;
  rep.feasible = rep.mixture_j_cond <= config.epsilon + 1e-9;
  return rep;
}

}  // namespace ccssp
