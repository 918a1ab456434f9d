#include "ccssp/policy.hpp"

#include <cmath>

#include "ccssp/errors.hpp"

namespace ccssp {

ActionId CostAugmentedPolicy::action(StateId x, std::int64_t cost_units) const {
  if (x == kTerminal) return 0;
  const auto idx = grid.index_of(cost_units);
  if (!idx) return fallback.action(x);
  return table.at(static_cast<std::size_t>(x - 1) * grid.size() + *idx);
}

CostAugmentedPolicy make_cost_augmented(const AugmentedS& aug, const std::vector<std::size_t>& rows) {
  CostAugmentedPolicy p;
  p.grid = aug.grid;
  p.base_states = aug.base_states;
  p.fallback = aug.fallback;
  p.table.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) p.table[s] = static_cast<ActionId>(aug.model.tag(rows[s]));
  return p;
}

LabeledPolicy make_labeled(const AugmentedM& aug, const std::vector<std::size_t>& rows) {
  LabeledPolicy p;
  p.base_states = aug.base_states;
  p.table.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) p.table[s] = aug.model.tag(rows[s]);
  return p;
}

namespace {

std::size_t find_row(const CostModel& m, StateId s, std::int64_t tag) {
  for (std::size_t r = m.first_row(s); r < m.end_row(s); ++r) {
    if (m.tag(r) == tag) return r;
  }
  throw PolicyModelMismatch("no row with tag " + std::to_string(tag) + " at augmented state " + std::to_string(s));
}

}  // namespace

std::vector<std::size_t> rows_of(const AugmentedS& aug, const CostAugmentedPolicy& policy) {
  const std::size_t n = aug.model.num_states();
  if (policy.table.size() != n) throw PolicyModelMismatch("cost-augmented policy size mismatch");
  std::vector<std::size_t> rows(n);
  for (std::size_t s = 0; s < n; ++s) rows[s] = find_row(aug.model, static_cast<StateId>(s), policy.table[s]);
  return rows;
}

std::vector<std::size_t> rows_of(const AugmentedM& aug, const LabeledPolicy& policy) {
  const std::size_t n = aug.model.num_states();
  if (policy.table.size() != n) throw PolicyModelMismatch("labeled policy size mismatch");
  std::vector<std::size_t> rows(n);
  for (std::size_t s = 0; s < n; ++s) rows[s] = find_row(aug.model, static_cast<StateId>(s), policy.table[s]);
  return rows;
}

std::vector<std::size_t> lift_rows(const AugmentedS& aug, const StationaryPolicy& policy) {
  const std::size_t n = aug.model.num_states();
  std::vector<std::size_t> rows(n);
  for (std::size_t s = 0; s < n; ++s) {
    const StateId x = aug.base_state(static_cast<StateId>(s));
    rows[s] = find_row(aug.model, static_cast<StateId>(s), policy.action(x));
  }
  return rows;
}

std::vector<std::size_t> lift_rows(const AugmentedM& aug, const StationaryPolicy& policy) {
  const std::size_t n = aug.model.num_states();
  std::vector<std::size_t> rows(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto st = static_cast<StateId>(s);
    if (s < aug.base_states) {
      rows[s] = find_row(aug.model, st, label_tag(policy.action(st), false));
    } else {
      rows[s] = aug.model.first_row(st);
    }
  }
  return rows;
}

namespace {

void check_component(const Mdp& mdp, const ComponentPolicy& c) {
  const std::size_t n = mdp.num_states();
  auto admissible = [&](StateId x, ActionId u) {
    return u >= 0 && static_cast<std::size_t>(u) < mdp.num_actions(x);
  };
  if (const auto* s = std::get_if<StationaryPolicy>(&c)) {
    s->check_compatible(mdp);
  } else if (const auto* a = std::get_if<CostAugmentedPolicy>(&c)) {
    if (a->base_states != n || a->table.size() != (n - 1) * a->grid.size()) {
      throw PolicyModelMismatch("cost-augmented policy does not fit the model");
    }
    a->fallback.check_compatible(mdp);
    for (std::size_t i = 0; i < a->table.size(); ++i) {
      const auto x = static_cast<StateId>(i / a->grid.size() + 1);
      if (!admissible(x, a->table[i])) throw PolicyModelMismatch("inadmissible action at state " + std::to_string(x));
    }
  } else {
    const auto& l = std::get<LabeledPolicy>(c);
    if (l.base_states != n || l.table.size() != 2 * n + 1) throw PolicyModelMismatch("labeled policy does not fit the model");
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const auto x = static_cast<StateId>(i % n);
      if (!admissible(x, tag_action(l.table[i]))) throw PolicyModelMismatch("inadmissible action at state " + std::to_string(x));
    }
  }
}

}  // namespace

void check_policy(const Mdp& mdp, const Policy& policy) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MixedPolicy>) {
          if (p.components.empty()) throw PolicyModelMismatch("mixed policy has no components");
          double total = 0.0;
          for (const auto& c : p.components) {
            if (c.weight < 0.0) throw PolicyModelMismatch("negative mixture weight");
            total += c.weight;
            check_component(mdp, c.policy);
          }
          if (std::abs(total - 1.0) > 1e-9) throw PolicyModelMismatch("mixture weights do not sum to 1");
        } else {
          check_component(mdp, ComponentPolicy(p));
        }
      },
      policy);
}

PolicyRunner::PolicyRunner(const Policy& policy, double cost_resolution, double u01) : delta_(cost_resolution) {
  auto bind = [this](const auto& p) {
    using T = std::decay_t<decltype(p)>;
    if constexpr (!std::is_same_v<T, MixedPolicy>) active_ = &p;
  };
  if (const auto* mixed = std::get_if<MixedPolicy>(&policy)) {
    if (mixed->components.empty()) throw PolicyModelMismatch("mixed policy has no components");
    double acc = 0.0;
    component_ = mixed->components.size() - 1;
    for (std::size_t i = 0; i < mixed->components.size(); ++i) {
      acc += mixed->components[i].weight;
      if (u01 < acc) {
        component_ = i;
        break;
      }
    }
    // Skip trailing zero-weight components picked only by rounding.
    while (component_ > 0 && mixed->components[component_].weight <= 0.0) --component_;
    std::visit(bind, mixed->components[component_].policy);
  } else {
    std::visit(bind, policy);
  }
}

ActionId PolicyRunner::act(StateId x, double u01) {
  if (const auto* s = std::get_if<const StationaryPolicy*>(&active_)) return (*s)->sample(x, u01);
  if (const auto* a = std::get_if<const CostAugmentedPolicy*>(&active_)) return (*a)->action(x, units_);
  const LabeledPolicy* l = std::get<const LabeledPolicy*>(active_);
  const std::int64_t tag = l->tag(x, failed_);
  if (tag_declares(tag)) failed_ = true;
  return tag_action(tag);
}

void PolicyRunner::observe(double cost) { units_ += std::llround(cost / delta_); }

}  // namespace ccssp
