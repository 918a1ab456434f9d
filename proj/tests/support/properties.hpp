#pragma once

#include <cstdint>
#include <string>

namespace properties {

struct Outcome {
  int cases = 0;
  int failures = 0;
  std::string first_failure;
  bool ok() const { return failures == 0 && cases > 0; }
};

/// t-fold belief update equals alpha / (alpha + gamma^t (1 - alpha)).
Outcome belief_telescoping(int cases, std::uint64_t seed);

/// Total cost on gamma_leak(mdp) equals discounted cost on mdp.
Outcome gamma_leak_equivalence(int cases, std::uint64_t seed);

/// J_obj on the cost-level model does not depend on the cap once every
/// successful path stays below it.
Outcome cap_invariance(int cases, std::uint64_t seed);

/// Success-conditioned cost of the conditional-cost baseline agrees with
/// the Monte Carlo conditional mean within 3 sigma.
Outcome conditional_transform_vs_monte_carlo(int cases, std::uint64_t seed);

}  // namespace properties
