#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ccssp/mdp.hpp"
#include "ccssp/policy.hpp"

namespace ccssp {

enum class EpisodeOutcome { running, success, failure, truncated };

const char* to_string(EpisodeOutcome o);

struct StepResult {
  StateId state = 0;
  double cost = 0.0;
  EpisodeOutcome status = EpisodeOutcome::running;
  int failure_class = -1;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Something a policy can be executed in. Implementations hold the episode
/// state between reset() and the steps that follow.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::unique_ptr<Environment> clone() const = 0;
  /// Starts an episode; may finish it immediately (terminal or dead start).
  virtual StepResult reset(std::mt19937_64& rng) = 0;
  virtual StepResult step(ActionId u, std::mt19937_64& rng) = 0;
  virtual double cost_resolution() const = 0;
  virtual const Mdp& model() const = 0;
  virtual std::vector<std::string> failure_classes() const = 0;
  /// Continuous position, when the environment has one.
  virtual std::optional<Point> position() const { return std::nullopt; }
};

/// Samples the abstract MDP. Entering a state with max reach probability 0
/// ends the episode as a failure.
class MdpEnvironment final : public Environment {
 public:
  MdpEnvironment(const Mdp& mdp, StateId start, std::vector<bool> dead);
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MdpEnvironment>(*this); }
  StepResult reset(std::mt19937_64& rng) override;
  StepResult step(ActionId u, std::mt19937_64& rng) override;
  double cost_resolution() const override { return mdp_->cost_resolution(); }
  const Mdp& model() const override { return *mdp_; }
  std::vector<std::string> failure_classes() const override { return {"dead_end"}; }

 private:
  StepResult classify(StateId x, double cost) const;
  const Mdp* mdp_;
  StateId start_;
  std::vector<bool> dead_;
  StateId current_ = 0;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Counter-based per-episode seed.
std::uint64_t episode_seed(std::uint64_t master, std::uint64_t index);

struct Trajectory {
  std::vector<StateId> states;
  std::vector<ActionId> actions;
  std::vector<double> costs;
  std::vector<Point> positions;  // empty unless the environment is continuous
  EpisodeOutcome outcome = EpisodeOutcome::running;
  int failure_class = -1;
  std::size_t component = 0;
  double total_cost = 0.0;
  std::size_t steps() const noexcept { return actions.size(); }
};

struct EpisodeOptions {
  std::size_t max_steps = 10'000;
  bool record = true;
};

Trajectory run_episode(Environment& env, const Policy& policy, std::uint64_t seed,
                       const EpisodeOptions& opts = {});

struct EpisodeStats {
  std::size_t n_episodes = 0;
  std::size_t n_success = 0;
  std::size_t n_truncated = 0;
  double cond_mean_cost = 0.0;  // meaningful only when n_success > 0
  double cond_cost_stddev = 0.0;
  std::map<std::string, std::size_t> failure_counts;
  double mean_steps = 0.0;
  std::uint64_t seed = 0;
  std::size_t failures() const;
  double failure_frequency() const;
  friend bool operator==(const EpisodeStats&, const EpisodeStats&) = default;
};

struct MonteCarloOptions {
  std::size_t max_steps = 10'000;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// n independent episodes; results do not depend on the thread count.
EpisodeStats monte_carlo(const Environment& env, const Policy& policy, std::size_t n, std::uint64_t seed,
                         const MonteCarloOptions& opts = {});

}  // namespace ccssp
