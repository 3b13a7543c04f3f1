#pragma once

#include <vector>

#include "overloadx/ftsp.hpp"
#include "overloadx/params.hpp"

namespace overloadx {

/// Right-hand side of the averaging-principle fluid ODE, given the share pi
/// of freed pool-2 capacity routed to class 1. Throws unless pi in [0, 1].
FluidState ode_rhs(const ModelParams& p, const FluidState& x, double pi);

enum class FluidRegime { manifold, pi_one, pi_zero };

const char* to_string(FluidRegime regime);

struct FluidPath {
  double h = 0.0;
  std::vector<double> t;
  std::vector<FluidState> x;
  std::vector<double> pi;  ///< share used over the step starting at t[i]
  std::vector<FluidRegime> regime;
  std::vector<bool> in_a;  ///< frozen process positive recurrent at x[i]

  std::size_t size() const { return t.size(); }
};

struct FluidOptions {
  PiMethod pi_method = PiMethod::automatic;
  double pi_cache_tol = 1e-4;  ///< reuse pi while the state moves less than this
};

/// Fixed-step RK4 with the regime chosen per stage from d = q1 - kappa - r q2
/// against the band 10 h (total event rate). Inside the band the state is
/// projected onto d = 0 at constant q1 + q2 after each step.
/// Throws on h <= 0, T < 0 or a step leaving the state space by more than 10 h.
FluidPath integrate_fluid(const ModelParams& p, const FluidState& x0, double T, double h,
                          const FluidOptions& options = {});

struct StationaryPoint {
  double z12s = 0.0;
  double q1s = 0.0;
  double q2s = 0.0;
  double piStar = 0.0;
  bool inA = false;

  FluidState state() const { return {q1s, q2s, z12s}; }
};

StationaryPoint stationary_point(const ModelParams& p);

/// First grid time after which the path stays within tol of target in the
/// max norm. Throws if tol <= 0 or the path never settles.
double time_to_stationarity(const FluidPath& path, const FluidState& target, double tol);

double max_norm_distance(const FluidState& a, const FluidState& b);

}  // namespace overloadx
