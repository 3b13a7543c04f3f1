#include <gtest/gtest.h>

#include <cmath>

#include "overloadx/params.hpp"
#include "overloadx/rational.hpp"

using namespace overloadx;

TEST(Rational, ParsesAndReduces) {
  EXPECT_EQ(Rational::parse("2/4"), Rational(1, 2));
  EXPECT_EQ(Rational::parse("3"), Rational(3, 1));
  EXPECT_EQ(Rational(6, 4).to_string(), "3/2");
  EXPECT_THROW(Rational::parse("0.5"), std::invalid_argument);
  EXPECT_THROW(Rational::parse("1/0"), std::invalid_argument);
  EXPECT_THROW(Rational::parse(""), std::invalid_argument);
}

TEST(OfferedLoads, BaseCase) {
  const auto l = offered_loads(base_case());
  EXPECT_NEAR(l.rho1, 1.3, 1e-12);
  EXPECT_NEAR(l.rho2, 0.9, 1e-12);
  EXPECT_NEAR(l.qa1, 1.5, 1e-12);
  EXPECT_EQ(l.qa2, 0.0);
}

TEST(OfferedLoads, CriticalAndOverloadedBoth) {
  auto p = base_case();
  p.lambda[0] = p.m[0] * p.mu11();
  EXPECT_EQ(offered_loads(p).qa1, 0.0);

  p.lambda = {1.5, 1.2};
  const auto l = offered_loads(p);
  EXPECT_NEAR(l.qa1, 2.5, 1e-12);
  EXPECT_NEAR(l.qa2, 1.0, 1e-12);
}

TEST(CheckOverload, BaseCaseHolds) {
  const auto v = check_overload(base_case());
  EXPECT_TRUE(v.pool2_cannot_absorb);
  EXPECT_TRUE(v.class1_more_overloaded);
  EXPECT_NEAR(v.margin1, 0.3 - 0.8 * 0.1, 1e-12);
  EXPECT_NEAR(v.margin2, 1.5, 1e-12);
  EXPECT_TRUE(v.holds());
}

TEST(CheckOverload, FailingCases) {
  auto p = base_case();
  p.lambda[0] = 0.9;
  EXPECT_FALSE(check_overload(p).pool2_cannot_absorb);

  p = base_case();
  p.lambda = {1.1, 0.5};
  const auto v = check_overload(p);
  EXPECT_FALSE(v.pool2_cannot_absorb);
  EXPECT_NEAR(v.margin1, 0.1 - 0.4, 1e-12);
}

TEST(CheckOverload, MonotoneInLambda1) {
  auto p = base_case();
  bool held = false;
  for (double l1 = 0.5; l1 < 4.0; l1 += 0.01) {
    p.lambda[0] = l1;
    const bool h = check_overload(p).pool2_cannot_absorb;
    EXPECT_FALSE(held && !h) << "condition flipped back at lambda1 = " << l1;
    held = held || h;
  }
  EXPECT_TRUE(held);
}

TEST(Scale, ProportionalThresholds) {
  const auto p = base_case();
  EXPECT_EQ(scale(p, 25).k12, 3);
  const auto s = scale(p, 100);
  EXPECT_EQ(s.k12, 10);
  EXPECT_DOUBLE_EQ(s.lambda[0], 130.0);
  EXPECT_DOUBLE_EQ(s.lambda[1], 90.0);
  EXPECT_EQ(s.m[0], 100);
  EXPECT_EQ(s.m[1], 100);

  const auto one = scale(p, 1);
  EXPECT_EQ(one.m[0], 1);
  EXPECT_EQ(one.k12, 1);
  EXPECT_THROW(scale(p, 0), std::invalid_argument);
}

TEST(Scale, ArrivalRatesConverge) {
  const auto p = base_case();
  for (int n : {25, 100, 400, 1600}) {
    const auto s = scale(p, n);
    for (int i = 0; i < 2; ++i) EXPECT_LE(std::abs(s.lambda[i] / n - p.lambda[i]), 1.0 / n);
  }
}

TEST(Scale, SublinearThresholds) {
  const auto scheme = ThresholdScheme::sublinear(0.5, 0.5, 0.75);
  const auto s = scale(base_case(), 10000, scheme);
  EXPECT_EQ(s.k12, 500);
  EXPECT_THROW(ThresholdScheme::sublinear(1, 1, 0.5), std::invalid_argument);
  EXPECT_THROW(ThresholdScheme::sublinear(1, 1, 1.0), std::invalid_argument);
}

TEST(Scale, RoundHalfUp) {
  EXPECT_EQ(round_half_up(2.5), 3);
  EXPECT_EQ(round_half_up(2.49), 2);
  EXPECT_EQ(round_half_up(-0.5), 0);
}

TEST(ModelParams, ValidateRejectsBadInput) {
  auto p = base_case();
  EXPECT_NO_THROW(p.validate());
  p.theta[0] = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = base_case();
  p.r12 = Rational(1, 2);
  p.r21 = Rational(1, 1);
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = base_case();
  p.kappa12 = -0.1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
