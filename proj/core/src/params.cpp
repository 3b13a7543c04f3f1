#include "overloadx/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace overloadx {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite and > 0, got " +
                                std::to_string(v));
  }
}

// Guards against 0.1 * 100 landing a hair above an integer.
std::int64_t ceil_tolerant(double x) { return static_cast<std::int64_t>(std::ceil(x - 1e-9)); }

}  // namespace

void ModelParams::validate() const {
  require_positive(lambda[0], "lambda1");
  require_positive(lambda[1], "lambda2");
  require_positive(theta[0], "theta1");
  require_positive(theta[1], "theta2");
  require_positive(mu[0][0], "mu11");
  require_positive(mu[0][1], "mu12");
  require_positive(mu[1][0], "mu21");
  require_positive(mu[1][1], "mu22");
  require_positive(m[0], "m1");
  require_positive(m[1], "m2");
  if (r12 < r21) {
    throw std::invalid_argument("r12 must be >= r21, got " + r12.to_string() + " < " +
                                r21.to_string());
  }
  if (!(kappa12 >= 0.0) || !(kappa21 >= 0.0)) {
    throw std::invalid_argument("threshold offsets kappa12, kappa21 must be >= 0");
  }
}

ModelParams base_case() {
  ModelParams p;
  p.lambda = {1.3, 0.9};
  p.theta = {0.2, 0.2};
  p.mu = {{{1.0, 0.8}, {0.8, 1.0}}};
  p.m = {1.0, 1.0};
  p.r12 = Rational(1, 1);
  p.r21 = Rational(1, 1);
  p.kappa12 = 0.1;
  p.kappa21 = 0.1;
  return p;
}

OfferedLoad offered_loads(const ModelParams& p) {
  OfferedLoad out;
  out.rho1 = p.lambda[0] / (p.m[0] * p.mu11());
  out.rho2 = p.lambda[1] / (p.m[1] * p.mu22());
  out.qa1 = std::max(0.0, p.lambda[0] - p.mu11() * p.m[0]) / p.theta[0];
  out.qa2 = std::max(0.0, p.lambda[1] - p.mu22() * p.m[1]) / p.theta[1];
  return out;
}

OverloadVerdict check_overload(const ModelParams& p) {
  const auto load = offered_loads(p);
  OverloadVerdict v;
  const double spare = p.mu12() * p.m[1] * std::max(0.0, 1.0 - load.rho2);
  v.margin1 = p.theta[0] * load.qa1 - spare;
  v.pool2_cannot_absorb = v.margin1 > 0.0;
  v.margin2 = load.qa1 - p.r12.value() * load.qa2;
  v.class1_more_overloaded = v.margin2 > 0.0;
  return v;
}

ThresholdScheme ThresholdScheme::sublinear(double c12, double c21, double a) {
  if (!(a > 0.5 && a < 1.0)) {
    throw std::invalid_argument("sublinear threshold exponent must lie in (1/2, 1)");
  }
  ThresholdScheme s;
  s.kind = ThresholdKind::sublinear;
  s.coefficient12 = c12;
  s.coefficient21 = c21;
  s.exponent = a;
  return s;
}

std::int64_t round_half_up(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

ScaledSystem scale(const ModelParams& p, int n, const ThresholdScheme& scheme) {
  if (n < 1) {
    throw std::invalid_argument("scale parameter n must be >= 1, got " + std::to_string(n));
  }
  p.validate();
  ScaledSystem s;
  s.n = n;
  s.parent = p;
  const double dn = static_cast<double>(n);
  s.lambda = {dn * p.lambda[0], dn * p.lambda[1]};
  s.m = {std::max<std::int64_t>(1, round_half_up(dn * p.m[0])),
         std::max<std::int64_t>(1, round_half_up(dn * p.m[1]))};
  if (scheme.kind == ThresholdKind::proportional) {
    s.k12 = ceil_tolerant(p.kappa12 * dn);
    s.k21 = ceil_tolerant(p.kappa21 * dn);
  } else {
    const double cn = std::pow(dn, scheme.exponent);
    s.k12 = ceil_tolerant(scheme.coefficient12 * cn);
    s.k21 = ceil_tolerant(scheme.coefficient21 * cn);
  }
  return s;
}

ModelParams ScaledSystem::effective_params() const {
  ModelParams p = parent;
  const double dn = static_cast<double>(n);
  p.lambda = {lambda[0] / dn, lambda[1] / dn};
  p.m = {static_cast<double>(m[0]) / dn, static_cast<double>(m[1]) / dn};
  p.kappa12 = static_cast<double>(k12) / dn;
  p.kappa21 = static_cast<double>(k21) / dn;
  return p;
}

}  // namespace overloadx
