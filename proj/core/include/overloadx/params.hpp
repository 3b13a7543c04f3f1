#pragma once

#include <array>
#include <cstdint>

#include "overloadx/rational.hpp"

namespace overloadx {

/// Rates, pool sizes and FQR-T control parameters of the two-class,
/// two-pool X model at fluid scale. Class i, pool j.
struct ModelParams {
  std::array<double, 2> lambda{};  ///< arrival rates
  std::array<double, 2> theta{};   ///< abandonment rate per waiting customer
  std::array<std::array<double, 2>, 2> mu{};  ///< mu[i][j]: class i served in pool j
  std::array<double, 2> m{};       ///< pool capacities
  Rational r12{1, 1};
  Rational r21{1, 1};
  double kappa12 = 0.0;  ///< fluid-scale threshold offset for D_{1,2}
  double kappa21 = 0.0;

  double mu11() const { return mu[0][0]; }
  double mu12() const { return mu[0][1]; }
  double mu21() const { return mu[1][0]; }
  double mu22() const { return mu[1][1]; }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// The reference configuration used throughout the simulation study:
/// lambda = (1.3, 0.9), theta = 0.2, mu11 = mu22 = 1, mu12 = mu21 = 0.8,
/// m = (1, 1), r = 1, kappa12 = kappa21 = 0.1.
ModelParams base_case();

struct OfferedLoad {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double qa1 = 0.0;  ///< stationary fluid queue of class 1 without sharing
  double qa2 = 0.0;
};

OfferedLoad offered_loads(const ModelParams& p);

struct OverloadVerdict {
  bool pool2_cannot_absorb = false;  ///< theta1 qa1 > mu12 m2 (1 - rho2)^+
  double margin1 = 0.0;              ///< lhs - rhs of the condition above
  bool class1_more_overloaded = false;  ///< qa1 > r12 qa2
  double margin2 = 0.0;
  bool holds() const { return pool2_cannot_absorb && class1_more_overloaded; }
};

OverloadVerdict check_overload(const ModelParams& p);

enum class ThresholdKind { proportional, sublinear };

/// Threshold scaling rule: proportional k^n = ceil(kappa n), or sublinear
/// k^n = ceil(c n^a) with 1/2 < a < 1.
struct ThresholdScheme {
  ThresholdKind kind = ThresholdKind::proportional;
  double coefficient12 = 0.0;  ///< c for sublinear; ignored for proportional
  double coefficient21 = 0.0;
  double exponent = 0.75;

  static ThresholdScheme proportional() { return {}; }
  static ThresholdScheme sublinear(double c12, double c21, double a);
};

/// Integer-valued system n. Arrival rates are kept real (n * lambda).
struct ScaledSystem {
  int n = 1;
  std::array<double, 2> lambda{};
  std::array<std::int64_t, 2> m{};
  std::int64_t k12 = 0;
  std::int64_t k21 = 0;
  ModelParams parent;

  /// Fluid-scale parameters seen by system n: lambda^n/n, m^n/n and the
  /// effective threshold offsets k^n/n.
  ModelParams effective_params() const;
};

ScaledSystem scale(const ModelParams& p, int n,
                   const ThresholdScheme& scheme = ThresholdScheme::proportional());

/// Nearest integer, ties rounded up.
std::int64_t round_half_up(double x);

}  // namespace overloadx
