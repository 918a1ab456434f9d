#include "ccssp/mdp.hpp"

#include <cmath>
#include <sstream>

#include "ccssp/errors.hpp"

namespace ccssp {

Mdp Mdp::from_table(double cost_resolution,
                    const std::vector<std::vector<std::vector<Outcome>>>& table) {
  MdpBuilder builder(table.size(), cost_resolution);
  for (std::size_t x = 0; x < table.size(); ++x) {
    for (const auto& row : table[x]) builder.add_action(static_cast<StateId>(x), row);
  }
  return std::move(builder).build();
}

double Mdp::expected_cost(StateId x, ActionId u) const {
  double total = 0.0;
  for (const Outcome& o : outcomes(x, u)) total += o.prob * o.cost;
  return total;
}

MdpBuilder::MdpBuilder(std::size_t n_states, double cost_resolution)
    : cost_resolution_(cost_resolution), rows_(n_states) {}

ActionId MdpBuilder::add_action(StateId x, std::vector<Outcome> outcomes) {
  if (x < 0 || static_cast<std::size_t>(x) >= rows_.size()) {
    throw ConfigInvalid("add_action: state " + std::to_string(x) + " out of range");
  }
  rows_[x].push_back(std::move(outcomes));
  return static_cast<ActionId>(rows_[x].size() - 1);
}

Mdp MdpBuilder::build() && {
  Mdp mdp;
  mdp.cost_resolution_ = cost_resolution_;
  mdp.state_rows_.reserve(rows_.size() + 1);
  for (auto& state_rows : rows_) {
    for (auto& row : state_rows) {
      mdp.outcomes_.insert(mdp.outcomes_.end(), row.begin(), row.end());
      mdp.row_outcomes_.push_back(mdp.outcomes_.size());
    }
    mdp.state_rows_.push_back(mdp.row_outcomes_.size() - 1);
  }
  rows_.clear();
  return mdp;
}

std::vector<std::string> validate_mdp(const Mdp& mdp) {
  std::vector<std::string> issues;
  auto report = [&issues](StateId x, std::size_t u, const std::string& msg) {
    std::ostringstream os;
    os << "state " << x << " action " << u << ": " << msg;
    issues.push_back(os.str());
  };

  const double delta = mdp.cost_resolution();
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    issues.push_back("cost_resolution must be a positive finite number");
  }
  const std::size_t n = mdp.num_states();
  if (n == 0) {
    issues.push_back("model has no states");
    return issues;
  }

  for (std::size_t xi = 0; xi < n; ++xi) {
    const auto x = static_cast<StateId>(xi);
    if (mdp.num_actions(x) == 0) {
      issues.push_back("state " + std::to_string(x) + " has no actions");
      continue;
    }
    for (std::size_t u = 0; u < mdp.num_actions(x); ++u) {
      const auto outs = mdp.outcomes(x, static_cast<ActionId>(u));
      if (outs.empty()) {
        report(x, u, "empty outcome list");
        continue;
      }
      double sum = 0.0;
      for (const Outcome& o : outs) {
        sum += o.prob;
        if (!(o.prob > 0.0 && o.prob <= 1.0)) {
          std::ostringstream os;
          os << "probability " << o.prob << " outside (0,1]";
          report(x, u, os.str());
        }
        if (o.next < 0 || static_cast<std::size_t>(o.next) >= n) {
          report(x, u, "successor " + std::to_string(o.next) + " out of range");
        }
        if (!(o.cost >= 0.0) || !std::isfinite(o.cost)) {
          std::ostringstream os;
          os << "negative or non-finite cost " << o.cost;
          report(x, u, os.str());
        } else if (delta > 0.0 && o.cost != 0.0) {
          const double units = o.cost / delta;
          if (std::abs(units - std::round(units)) * delta > 1e-9) {
            std::ostringstream os;
            os << "cost " << o.cost << " not on the resolution grid " << delta;
            report(x, u, os.str());
          }
        }
        if (x == kTerminal) {
          if (o.next != kTerminal) report(x, u, "terminal transition leaves state 0");
          if (o.cost != 0.0) report(x, u, "terminal cost nonzero");
        }
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "probabilities sum to " << sum;
        report(x, u, os.str());
      }
    }
  }
  return issues;
}

StationaryPolicy StationaryPolicy::deterministic(std::vector<ActionId> actions) {
  StationaryPolicy p;
  p.actions_ = std::move(actions);
  return p;
}

StationaryPolicy StationaryPolicy::randomized(std::vector<std::vector<double>> distributions) {
  for (std::size_t x = 0; x < distributions.size(); ++x) {
    double sum = 0.0;
    for (double w : distributions[x]) {
      if (w < 0.0) throw ConfigInvalid("negative action probability at state " + std::to_string(x));
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigInvalid("action distribution at state " + std::to_string(x) + " does not sum to 1");
    }
  }
  StationaryPolicy p;
  p.distributions_ = std::move(distributions);
  return p;
}

ActionId StationaryPolicy::action(StateId x) const {
  if (!is_deterministic()) throw PolicyModelMismatch("action() called on a randomized policy");
  return actions_.at(x);
}

std::vector<std::pair<ActionId, double>> StationaryPolicy::choices(StateId x) const {
  if (is_deterministic()) return {{actions_.at(x), 1.0}};
  std::vector<std::pair<ActionId, double>> out;
  const auto& dist = distributions_.at(x);
  for (std::size_t u = 0; u < dist.size(); ++u) {
    if (dist[u] > 0.0) out.emplace_back(static_cast<ActionId>(u), dist[u]);
  }
  return out;
}

ActionId StationaryPolicy::sample(StateId x, double u01) const {
  if (is_deterministic()) return actions_.at(x);
  const auto& dist = distributions_.at(x);
  double acc = 0.0;
  ActionId last = 0;
  for (std::size_t u = 0; u < dist.size(); ++u) {
    if (dist[u] <= 0.0) continue;
    acc += dist[u];
    last = static_cast<ActionId>(u);
    if (u01 < acc) return last;
  }
  return last;
}

void StationaryPolicy::check_compatible(const Mdp& mdp) const {
  if (num_states() != mdp.num_states()) {
    throw PolicyModelMismatch("policy covers " + std::to_string(num_states()) +
                              " states, model has " + std::to_string(mdp.num_states()));
  }
  for (std::size_t x = 0; x < num_states(); ++x) {
    const auto nu = mdp.num_actions(static_cast<StateId>(x));
    if (is_deterministic()) {
      if (actions_[x] < 0 || static_cast<std::size_t>(actions_[x]) >= nu) {
        throw PolicyModelMismatch("policy action " + std::to_string(actions_[x]) +
                                  " not admissible at state " + std::to_string(x));
      }
    } else if (distributions_[x].size() != nu) {
      throw PolicyModelMismatch("action distribution size mismatch at state " + std::to_string(x));
    }
  }
}

}  // namespace ccssp
