#pragma once

#include <random>

#include "overloadx/fluid.hpp"
#include "overloadx/params.hpp"

namespace testsupport {

inline overloadx::ModelParams random_params(std::mt19937_64& g, bool pool_dependent = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  overloadx::ModelParams p;
  p.lambda = {1.1 + 1.2 * u(g), 0.4 + 0.8 * u(g)};
  p.theta = {0.1 + 0.5 * u(g), 0.1 + 0.5 * u(g)};
  p.mu[0][0] = 0.6 + 0.8 * u(g);
  p.mu[1][1] = 0.6 + 0.8 * u(g);
  p.mu[0][1] = pool_dependent ? p.mu[1][1] : 0.4 + 0.8 * u(g);
  p.mu[1][0] = 0.4 + 0.8 * u(g);
  p.m = {0.5 + u(g), 0.5 + u(g)};
  p.kappa12 = 0.2 * u(g);
  p.kappa21 = p.kappa12;
  return p;
}

// Overloaded, with the stationary point interior and inside the recurrence set.
inline overloadx::ModelParams random_admissible(std::mt19937_64& g, bool pool_dependent = false) {
  for (;;) {
    auto p = random_params(g, pool_dependent);
    if (!overloadx::check_overload(p).holds()) continue;
    const auto xs = overloadx::stationary_point(p);
    if (xs.z12s > 1e-3 * p.m[1] && xs.z12s < (1 - 1e-3) * p.m[1] && xs.inA &&
        xs.q2s > 1e-3) {
      return p;
    }
  }
}

inline overloadx::FluidState random_state(std::mt19937_64& g, const overloadx::ModelParams& p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {3.0 * u(g), 3.0 * u(g), p.m[1] * u(g)};
}

}  // namespace testsupport
