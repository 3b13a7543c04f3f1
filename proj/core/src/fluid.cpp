#include "overloadx/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace overloadx {

FluidState ode_rhs(const ModelParams& p, const FluidState& x, double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) {
    throw std::invalid_argument("routing share pi must lie in [0, 1], got " + std::to_string(pi));
  }
  const double z22 = p.m[1] - x.z12;
  const double freed = x.z12 * p.mu12() + z22 * p.mu22();
  return {
      p.lambda[0] - p.m[0] * p.mu11() - pi * freed - p.theta[0] * x.q1,
      p.lambda[1] - (1.0 - pi) * freed - p.theta[1] * x.q2,
      pi * z22 * p.mu22() - (1.0 - pi) * x.z12 * p.mu12(),
  };
}

const char* to_string(FluidRegime regime) {
  switch (regime) {
    case FluidRegime::manifold: return "manifold";
    case FluidRegime::pi_one: return "pi_one";
    case FluidRegime::pi_zero: return "pi_zero";
  }
  return "unknown";
}

double max_norm_distance(const FluidState& a, const FluidState& b) {
  return std::max({std::abs(a.q1 - b.q1), std::abs(a.q2 - b.q2), std::abs(a.z12 - b.z12)});
}

namespace {

FluidState axpy(const FluidState& x, double a, const FluidState& d) {
  return {x.q1 + a * d.q1, x.q2 + a * d.q2, x.z12 + a * d.z12};
}

class Integrator {
 public:
  Integrator(const ModelParams& p, double h, const FluidOptions& options)
      : p_(p), h_(h), options_(options), r_(p.r12.value()) {}

  double difference(const FluidState& x) const { return x.q1 - p_.kappa12 - r_ * x.q2; }

  double band(const FluidState& x) const { return 10.0 * h_ * total_event_rate(p_, x); }

  FluidRegime regime(const FluidState& x) const {
    const double d = difference(x);
    const double tol = band(x);
    if (d > tol) return FluidRegime::pi_one;
    if (d < -tol) return FluidRegime::pi_zero;
    return FluidRegime::manifold;
  }

  double share(const FluidState& x, FluidRegime g) {
    if (g == FluidRegime::pi_one) return 1.0;
    if (g == FluidRegime::pi_zero) return 0.0;
    if (!cached_ || max_norm_distance(x, cache_x_) > options_.pi_cache_tol) {
      cache_pi_ = pi_12(p_, clamp(x), options_.pi_method);
      cache_x_ = x;
      cached_ = true;
    }
    return cache_pi_;
  }

  // One-sided derivatives at the faces of the state space.
  FluidState derivative(const FluidState& x) {
    const FluidState c = clamp(x);
    FluidState d = ode_rhs(p_, c, share(c, regime(c)));
    if (c.q1 <= 0.0 && d.q1 < 0.0) d.q1 = 0.0;
    if (c.q2 <= 0.0 && d.q2 < 0.0) d.q2 = 0.0;
    if (c.z12 <= 0.0 && d.z12 < 0.0) d.z12 = 0.0;
    if (c.z12 >= p_.m[1] && d.z12 > 0.0) d.z12 = 0.0;
    return d;
  }

  FluidState clamp(const FluidState& x) const {
    return {std::max(0.0, x.q1), std::max(0.0, x.q2), std::clamp(x.z12, 0.0, p_.m[1])};
  }

  FluidState step(const FluidState& x) {
    const FluidState k1 = derivative(x);
    const FluidState k2 = derivative(axpy(x, h_ / 2, k1));
    const FluidState k3 = derivative(axpy(x, h_ / 2, k2));
    const FluidState k4 = derivative(axpy(x, h_, k3));
    FluidState y{
        x.q1 + h_ / 6 * (k1.q1 + 2 * k2.q1 + 2 * k3.q1 + k4.q1),
        x.q2 + h_ / 6 * (k1.q2 + 2 * k2.q2 + 2 * k3.q2 + k4.q2),
        x.z12 + h_ / 6 * (k1.z12 + 2 * k2.z12 + 2 * k3.z12 + k4.z12),
    };
    const double escape = max_norm_distance(y, clamp(y));
    if (escape > 10.0 * h_) {
      throw std::runtime_error("fluid step left the state space by " + std::to_string(escape));
    }
    y = clamp(y);
    if (regime(y) == FluidRegime::manifold) y = project(y);
    return y;
  }

  // The fast dynamics only reroute freed capacity between the queues, so
  // they move along q1 + q2 = const at fixed z12.
  FluidState project(const FluidState& x) const {
    const double qs = x.q1 + x.q2;
    const double q2 = (qs - p_.kappa12) / (1.0 + r_);
    if (q2 < 0.0) return x;
    return {qs - q2, q2, x.z12};
  }

 private:
  const ModelParams& p_;
  double h_;
  FluidOptions options_;
  double r_;
  bool cached_ = false;
  FluidState cache_x_;
  double cache_pi_ = 0.0;
};

}  // namespace

FluidPath integrate_fluid(const ModelParams& p, const FluidState& x0, double T, double h,
                          const FluidOptions& options) {
  if (!(h > 0.0)) throw std::invalid_argument("step size h must be > 0");
  if (!(T >= 0.0)) throw std::invalid_argument("horizon T must be >= 0");
  p.validate();
  require_state_space(p, x0);

  Integrator integ(p, h, options);
  const auto steps = static_cast<std::size_t>(std::llround(T / h));
  FluidPath path;
  path.h = h;
  path.t.reserve(steps + 1);
  path.x.reserve(steps + 1);
  path.pi.reserve(steps + 1);
  path.regime.reserve(steps + 1);
  path.in_a.reserve(steps + 1);

  FluidState x = x0;
  for (std::size_t i = 0;; ++i) {
    const FluidRegime g = integ.regime(x);
    path.t.push_back(static_cast<double>(i) * h);
    path.x.push_back(x);
    path.pi.push_back(integ.share(x, g));
    path.regime.push_back(g);
    path.in_a.push_back(is_positive_recurrent(p, x));
    if (i == steps) break;
    x = integ.step(x);
  }
  return path;
}

StationaryPoint stationary_point(const ModelParams& p) {
  p.validate();
  const double r = p.r12.value();
  const double num = p.theta[1] * (p.lambda[0] - p.m[0] * p.mu11() - p.theta[0] * p.kappa12) -
                     r * p.theta[0] * (p.lambda[1] - p.m[1] * p.mu22());
  const double den = r * p.theta[0] * p.mu22() + p.theta[1] * p.mu12();
  StationaryPoint s;
  s.z12s = std::clamp(num / den, 0.0, p.m[1]);
  s.q1s = std::max(0.0, (p.lambda[0] - p.m[0] * p.mu11() - p.mu12() * s.z12s) / p.theta[0]);
  s.q2s = std::max(0.0, (p.lambda[1] - p.mu22() * (p.m[1] - s.z12s)) / p.theta[1]);
  s.piStar = pi_12_stationary(p, s.state());
  s.inA = s.z12s < p.m[1];
  return s;
}

double time_to_stationarity(const FluidPath& path, const FluidState& target, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("stationarity tolerance must be > 0");
  std::size_t settled = path.size();
  for (std::size_t i = path.size(); i-- > 0;) {
    if (max_norm_distance(path.x[i], target) >= tol) break;
    settled = i;
  }
  if (settled == path.size()) {
    throw std::runtime_error("path never settles within " + std::to_string(tol) +
                             " of the target");
  }
  return path.t[settled];
}

}  // namespace overloadx
