#include "ccssp/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "ccssp/errors.hpp"
#include "ccssp/numeric.hpp"

namespace ccssp {

const char* to_string(EpisodeOutcome o) {
  switch (o) {
    case EpisodeOutcome::running: return "running";
    case EpisodeOutcome::success: return "success";
    case EpisodeOutcome::failure: return "failure";
    case EpisodeOutcome::truncated: return "truncated";
  }
  return "?";
}

MdpEnvironment::MdpEnvironment(const Mdp& mdp, StateId start, std::vector<bool> dead)
    : mdp_(&mdp), start_(start), dead_(std::move(dead)) {
  if (start < 0 || static_cast<std::size_t>(start) >= mdp.num_states()) {
    throw ConfigInvalid("start state " + std::to_string(start) + " out of range");
  }
  if (dead_.size() != mdp.num_states()) throw ConfigInvalid("dead-end mask does not match the model");
}

StepResult MdpEnvironment::classify(StateId x, double cost) const {
  StepResult r;
  r.state = x;
  r.cost = cost;
  if (x == kTerminal) {
    r.status = EpisodeOutcome::success;
  } else if (dead_[x]) {
    r.status = EpisodeOutcome::failure;
    r.failure_class = 0;
  }
  return r;
}

StepResult MdpEnvironment::reset(std::mt19937_64&) {
  current_ = start_;
  return classify(current_, 0.0);
}

StepResult MdpEnvironment::step(ActionId u, std::mt19937_64& rng) {
  if (u < 0 || static_cast<std::size_t>(u) >= mdp_->num_actions(current_)) {
    throw PolicyModelMismatch("action " + std::to_string(u) + " not admissible at state " + std::to_string(current_));
  }
  const auto outs = mdp_->outcomes(current_, u);
  const double v = u01(rng);
  double acc = 0.0;
  const Outcome* pick = &outs.back();
  for (const Outcome& o : outs) {
    acc += o.prob;
    if (v < acc) {
      pick = &o;
      break;
    }
  }
  current_ = pick->next;
  return classify(current_, pick->cost);
}

std::uint64_t episode_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Trajectory run_episode(Environment& env, const Policy& policy, std::uint64_t seed, const EpisodeOptions& opts) {
  std::mt19937_64 rng(seed);
  const double pick = u01(rng);
  PolicyRunner runner(policy, env.cost_resolution(), pick);
  Trajectory t;
  t.component = runner.component();
  StepResult s = env.reset(rng);
  if (opts.record) {
    t.states.push_back(s.state);
    if (auto p = env.position()) t.positions.push_back(*p);
  }
  CompensatedSum total;
  std::size_t steps = 0;
  while (s.status == EpisodeOutcome::running) {
    if (steps >= opts.max_steps) {
      s.status = EpisodeOutcome::truncated;
      break;
    }
    const ActionId u = runner.act(s.state, u01(rng));
    s = env.step(u, rng);
    runner.observe(s.cost);
    total.add(s.cost);
    ++steps;
    if (opts.record) {
      t.actions.push_back(u);
      t.costs.push_back(s.cost);
      t.states.push_back(s.state);
      if (auto p = env.position()) t.positions.push_back(*p);
    }
  }
  if (!opts.record) t.actions.resize(steps);
  t.outcome = s.status;
  t.failure_class = s.failure_class;
  t.total_cost = total.value();
  return t;
}

std::size_t EpisodeStats::failures() const {
  std::size_t f = 0;
  for (const auto& [k, v] : failure_counts) f += v;
  return f;
}

double EpisodeStats::failure_frequency() const {
  return n_episodes == 0 ? 0.0 : static_cast<double>(failures()) / static_cast<double>(n_episodes);
}

namespace {

struct Chunk {
  std::size_t success = 0, truncated = 0;
  std::vector<std::size_t> failures;
  CompensatedSum cost, cost_sq, steps;
};

constexpr std::size_t kChunk = 1024;

}  // namespace

EpisodeStats monte_carlo(const Environment& env, const Policy& policy, std::size_t n, std::uint64_t seed,
                         const MonteCarloOptions& opts) {
  if (n == 0) throw ConfigInvalid("episode count must be at least 1");
  check_policy(env.model(), policy);
  const std::vector<std::string> classes = env.failure_classes();
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<Chunk> chunks(n_chunks);
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    std::unique_ptr<Environment> local = env.clone();
    EpisodeOptions eo;
    eo.max_steps = opts.max_steps;
    eo.record = false;
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      Chunk& ch = chunks[c];
      ch.failures.assign(classes.size(), 0);
      try {
        for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
          const Trajectory t = run_episode(*local, policy, episode_seed(seed, i), eo);
          ch.steps.add(static_cast<double>(t.steps()));
          if (t.outcome == EpisodeOutcome::success) {
            ++ch.success;
            ch.cost.add(t.total_cost);
            ch.cost_sq.add(t.total_cost * t.total_cost);
          } else if (t.outcome == EpisodeOutcome::failure) {
            ++ch.failures.at(static_cast<std::size_t>(t.failure_class));
          } else {
            ++ch.truncated;
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  EpisodeStats st;
  st.n_episodes = n;
  st.seed = seed;
  for (const auto& cls : classes) st.failure_counts[cls] = 0;
  CompensatedSum cost, cost_sq, steps;
  for (const Chunk& ch : chunks) {
    st.n_success += ch.success;
    st.n_truncated += ch.truncated;
    for (std::size_t k = 0; k < classes.size(); ++k) st.failure_counts[classes[k]] += ch.failures[k];
    cost.add(ch.cost.value());
    cost_sq.add(ch.cost_sq.value());
    steps.add(ch.steps.value());
  }
  st.mean_steps = steps.value() / static_cast<double>(n);
  if (st.n_success > 0) {
    const double m = cost.value() / static_cast<double>(st.n_success);
    st.cond_mean_cost = m;
    const double var = cost_sq.value() / static_cast<double>(st.n_success) - m * m;
    st.cond_cost_stddev = std::sqrt(std::max(0.0, var));
  }
  return st;
}

}  // namespace ccssp
