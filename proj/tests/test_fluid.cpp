#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "overloadx/fluid.hpp"
#include "support.hpp"

using namespace overloadx;

namespace {

double sup_norm(const FluidState& a) {
  return std::max({std::abs(a.q1), std::abs(a.q2), std::abs(a.z12)});
}

}  // namespace

TEST(OdeRhs, PublishedStationaryPoint) {
  const auto d = ode_rhs(base_case(), {0.6556, 0.5556, 0.2111}, 0.1763);
  EXPECT_LT(sup_norm(d), 5e-4);
}

TEST(OdeRhs, DirectEvaluations) {
  const auto p = base_case();
  EXPECT_EQ(ode_rhs(p, {0.3, 0.3, p.m[1]}, 1.0).z12, 0.0);
  EXPECT_NEAR(ode_rhs(p, {1.5, 0.0, 0.0}, 1.0).q1, -1.0, 1e-12);
  EXPECT_THROW(ode_rhs(p, {1, 1, 0.5}, 1.2), std::invalid_argument);
  EXPECT_THROW(ode_rhs(p, {1, 1, 0.5}, -0.1), std::invalid_argument);
}

TEST(Stationary, BaseCase) {
  const auto s = stationary_point(base_case());
  EXPECT_NEAR(s.z12s, 0.2111, 5e-4);
  EXPECT_NEAR(s.q1s, 0.6556, 5e-4);
  EXPECT_NEAR(s.q2s, 0.5556, 5e-4);
  EXPECT_NEAR(s.piStar, 0.1763, 5e-4);
  EXPECT_TRUE(s.inA);
}

TEST(Stationary, ZeroThreshold) {
  auto p = base_case();
  p.kappa12 = p.kappa21 = 0.0;
  const auto s = stationary_point(p);
  EXPECT_NEAR(s.z12s, 0.08 / 0.36, 1e-12);
  EXPECT_NEAR(s.q1s, 0.6111, 1e-4);
  EXPECT_NEAR(s.q2s, 0.6111, 1e-4);
}

TEST(Stationary, CappedAtPoolSize) {
  auto p = base_case();
  p.lambda[0] = 20.0;
  const auto s = stationary_point(p);
  EXPECT_EQ(s.z12s, p.m[1]);
  EXPECT_FALSE(s.inA);
}

TEST(Stationary, ResidualRandomParameters) {
  std::mt19937_64 g(2024);
  for (int i = 0; i < 200; ++i) {
    const auto p = testsupport::random_admissible(g);
    const auto s = stationary_point(p);
    EXPECT_LT(sup_norm(ode_rhs(p, s.state(), s.piStar)), 1e-9);
    EXPECT_NEAR(pi_12(p, s.state()), s.piStar, 1e-8);
  }
}

TEST(Integrate, StationaryPathStaysPut) {
  const auto p = base_case();
  const auto xs = stationary_point(p).state();
  const auto path = integrate_fluid(p, xs, 20.0, 1e-3);
  double worst = 0.0;
  for (const auto& x : path.x) worst = std::max(worst, max_norm_distance(x, xs));
  EXPECT_LT(worst, 1e-6);
  EXPECT_EQ(time_to_stationarity(path, xs, 1e-6), 0.0);
}

TEST(Integrate, ConvergesFromOffManifoldStart) {
  const auto p = base_case();
  const auto xs = stationary_point(p).state();
  const FluidState x0{1.0, 0.2, 0.0};
  const auto a = integrate_fluid(p, x0, 40.0, 1e-3);
  const auto b = integrate_fluid(p, x0, 40.0, 5e-4);
  EXPECT_LT(max_norm_distance(a.x.back(), xs), 1e-4);
  EXPECT_LT(max_norm_distance(b.x.back(), xs), 1e-4);
  EXPECT_LT(max_norm_distance(a.x.back(), b.x.back()), 1e-5);
  EXPECT_EQ(a.regime.front(), FluidRegime::pi_one);
  EXPECT_EQ(a.regime.back(), FluidRegime::manifold);
}

TEST(Integrate, ExponentialApproach) {
  const auto p = base_case();
  const auto xs = stationary_point(p).state();
  const auto path = integrate_fluid(p, {1.0, 0.2, 0.0}, 40.0, 1e-3);
  const double t_hit = time_to_stationarity(path, xs, 1e-3);
  EXPECT_GT(t_hit, 0.0);
  EXPECT_LT(t_hit, 40.0);

  // least squares of log distance on [t_hit, t_hit + 8]
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int k = 0;
  for (std::size_t i = 0; i < path.size(); i += 50) {
    if (path.t[i] < t_hit || path.t[i] > t_hit + 8.0) continue;
    const double y = std::log(max_norm_distance(path.x[i], xs));
    sx += path.t[i];
    sy += y;
    sxx += path.t[i] * path.t[i];
    sxy += path.t[i] * y;
    syy += y * y;
    ++k;
  }
  const double cov = sxy - sx * sy / k;
  const double vx = sxx - sx * sx / k;
  const double vy = syy - sy * sy / k;
  const double slope = cov / vx;
  EXPECT_LT(slope, 0.0);
  EXPECT_GT(cov * cov / (vx * vy), 0.95);
}

TEST(Integrate, ManifoldPreserved) {
  const auto p = base_case();
  const double h = 1e-3;
  const FluidState x0{p.kappa12 + 0.8, 0.8, 0.3};
  const auto path = integrate_fluid(p, x0, 10.0, h);
  double worst = 0.0;
  for (const auto& x : path.x) {
    worst = std::max(worst, std::abs(x.q1 - p.kappa12 - p.r12.value() * x.q2));
  }
  EXPECT_LT(worst, 5 * h);
}

TEST(Integrate, FourthOrderOnSmoothSegment) {
  const auto p = base_case();
  const FluidState x0{2.5, 0.0, 0.0};
  const double T = 0.5;
  const auto c = integrate_fluid(p, x0, T, 0.02);
  const auto m = integrate_fluid(p, x0, T, 0.01);
  const auto f = integrate_fluid(p, x0, T, 0.005);
  for (auto r : f.regime) ASSERT_EQ(r, FluidRegime::pi_one);
  const double e1 = max_norm_distance(c.x.back(), m.x.back());
  const double e2 = max_norm_distance(m.x.back(), f.x.back());
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Integrate, PoolDependentClosedForm) {
  auto p = base_case();
  p.mu[0][1] = p.mu22();
  const FluidState x0{1.0, 0.2, 0.0};
  const double nu = p.mu22();
  const double eta1 = p.lambda[0] + p.lambda[1] - p.m[0] * p.mu11() - p.m[1] * nu;
  const double eta2 = p.theta[0];
  const auto path = integrate_fluid(p, x0, 20.0, 1e-3);
  double worst = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double qs = path.x[i].q1 + path.x[i].q2;
    const double exact = eta1 / eta2 + (x0.q1 + x0.q2 - eta1 / eta2) * std::exp(-eta2 * path.t[i]);
    worst = std::max(worst, std::abs(qs - exact));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Integrate, RecurrenceSetAbsorbing) {
  const auto p = base_case();
  const auto path = integrate_fluid(p, {1.0, 0.2, 0.0}, 40.0, 1e-3);
  std::size_t last_out = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!path.in_a[i]) last_out = i;
  }
  EXPECT_LT(path.t[last_out], 20.0);
  EXPECT_TRUE(path.in_a.back());
}

TEST(Integrate, RejectsBadArguments) {
  const auto p = base_case();
  EXPECT_THROW(integrate_fluid(p, {1, 0, 0}, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(integrate_fluid(p, {1, 0, 0}, -1.0, 1e-3), std::invalid_argument);
  EXPECT_THROW(integrate_fluid(p, {-1, 0, 0}, 1.0, 1e-3), std::invalid_argument);
  const auto path = integrate_fluid(p, {1, 0.2, 0}, 1.0, 1e-3);
  EXPECT_THROW(time_to_stationarity(path, stationary_point(p).state(), 0.0),
               std::invalid_argument);
  EXPECT_THROW(time_to_stationarity(path, stationary_point(p).state(), 1e-9), std::exception);
}
