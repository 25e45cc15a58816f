#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "finsler/comparison.hpp"
#include "finsler/errors.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/zoo.hpp"

using namespace finsler;

namespace {

const double pi = std::numbers::pi;

Vec pt(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(SLambda, ClosedForms) {
  EXPECT_NEAR(s_lambda(1.0, pi / 2), 1.0, 1e-15);
  EXPECT_EQ(s_lambda(0.0, 0.37), 0.37);
  EXPECT_NEAR(s_lambda(-1.0, 1.0), 1.1752011936438014, 1e-14);
}

TEST(SLambda, SolvesTheOde) {
  for (double lam : {-2.0, -0.25, 0.0, 0.5, 3.0}) {
    const double t = 0.4, h = 1e-4;
    const double s2 = (s_lambda(lam, t + h) - 2 * s_lambda(lam, t) + s_lambda(lam, t - h)) / (h * h);
    EXPECT_NEAR(s2 + lam * s_lambda(lam, t), 0.0, 1e-6) << lam;
    EXPECT_NEAR((s_lambda(lam, h) - s_lambda(lam, -h)) / (2 * h), 1.0, 1e-7);
  }
}

TEST(ModelVolume, Euclidean) {
  for (int n : {2, 3, 4})
    for (double r : {0.3, 1.0, 2.5})
      EXPECT_NEAR(model_volume(0.0, 0.0, n, r), unit_ball_volume(n) * std::pow(r, n),
                  1e-12 * std::pow(r, n));
}

TEST(ModelVolume, RoundSphereArea) {
  EXPECT_NEAR(model_volume(1.0, 0.0, 2, pi), 4.0 * pi, 1e-12);
  EXPECT_THROW(model_volume(1.0, 0.0, 2, pi + 0.1), RangeError);
  EXPECT_NO_THROW(model_volume(-1.0, 0.5, 3, 50.0));
}

TEST(ModelVolume, FunkEqualityAtTwentyRadii) {
  for (int n : {2, 3}) {
    const double delta = (n + 1) / (2.0 * (n - 1));
    for (int k = 1; k <= 20; ++k) {
      const double r = 0.25 * k;
      const double v = model_volume(-0.25, delta, n, r);
      EXPECT_NEAR(v, funk_ball_formula(n, r), 1e-8) << n << " " << r;
    }
  }
}

TEST(ModelVolume, DerivativeAndMonotone) {
  const ModelVolume mv{-0.25, 1.5, 2};
  double prev = 0.0;
  for (double r : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    const double h = 1e-3;
    const double fd = (8 * (mv.value(r + h) - mv.value(r - h)) -
                       (mv.value(r + 2 * h) - mv.value(r - 2 * h))) / (12 * h);
    EXPECT_NEAR(fd, mv.derivative(r), 1e-8 * std::max(1.0, mv.derivative(r)) + 1e-7);
    EXPECT_GT(mv.value(r), prev);
    prev = mv.value(r);
  }
  EXPECT_EQ(mv.value(0.0), 0.0);
}

TEST(Sweep, FunkIsTheEqualityCase) {
  auto f = make_funk(ConvexDomain::unit_ball(2));
  auto sw = curvature_bound_sweep(*f, -0.25, 1.5, 10);
  EXPECT_TRUE(sw.ok) << sw.failure;
  EXPECT_NEAR(sw.min_ricci, -0.25, 1e-6);
  EXPECT_NEAR(sw.min_s, 1.5, 1e-6);
}

TEST(RatioCheck, FunkRatioIsOne) {
  auto f = make_funk(ConvexDomain::unit_ball(2));
  RatioOptions o;
  o.source = DistanceSource::funk_closed_form;
  o.sweep_samples = 10;
  auto rep = ratio_monotonicity_check(*f, pt(0, 0), -0.25, 1.5, {0.5, 1.0, 2.0}, o);
  ASSERT_FALSE(rep.skipped) << rep.note;
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& row : rep.rows) EXPECT_NEAR(row.ratio, 1.0, 1e-3) << row.r;
  EXPECT_TRUE(rep.non_increasing);
}

TEST(RatioCheck, EuclideanRatioIsOne) {
  auto e = make_euclidean(2);
  RatioOptions o;
  o.volume.angles = 16;
  o.sweep_samples = 5;
  auto rep = ratio_monotonicity_check(*e, pt(0.2, 0.1), 0.0, 0.0, {0.5, 1.0, 2.0}, o);
  ASSERT_FALSE(rep.skipped);
  for (const auto& row : rep.rows) EXPECT_NEAR(row.ratio, 1.0, 1e-10);
  EXPECT_TRUE(rep.non_increasing);
}

TEST(RatioCheck, RoundSphereNonIncreasing) {
  auto s = make_sphere(2);
  RatioOptions o;
  o.volume.angles = 16;
  o.sweep_samples = 5;
  auto rep = ratio_monotonicity_check(*s, pt(0, 0), 1.0, 0.0, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, o);
  ASSERT_FALSE(rep.skipped);
  EXPECT_TRUE(rep.non_increasing);
  // constant curvature 1: the ball is the model ball
  for (const auto& row : rep.rows) EXPECT_NEAR(row.ratio, 1.0, 1e-6) << row.r;
}

TEST(RatioCheck, GuardSkipsViolatingMetric) {
  // hyperbolic plane has Ric = -F^2, violating lambda = 0
  auto h = make_hyperbolic(2);
  auto rep = ratio_monotonicity_check(*h, pt(0, 0), 0.0, 0.0, {0.5, 1.0});
  EXPECT_TRUE(rep.skipped);
  EXPECT_FALSE(rep.sweep.ok);
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_FALSE(rep.note.empty());
}

TEST(ConjugatePoint, RoundSphereAtPi) {
  auto s = make_sphere(2);
  auto cp = conjugate_point_bound(*s, pt(0.5, 0), pt(0, 1), 1.0, 5);
  ASSERT_TRUE(cp.found) << cp.note;
  EXPECT_NEAR(cp.t, pi, 1e-3);
  EXPECT_TRUE(cp.within_bound);
}

TEST(ConjugatePoint, ScaledInitialVelocity) {
  auto s = make_sphere(2);
  auto cp = conjugate_point_bound(*s, pt(0.5, 0), pt(0, 7.5), 1.0, 5);
  ASSERT_TRUE(cp.found);
  EXPECT_NEAR(cp.t, pi, 1e-3);
}

TEST(ConjugatePoint, SphereInThreeDimensions) {
  auto s = make_sphere(3);
  Vec x(3), y(3);
  x << 0.3, 0.0, 0.2;
  y << 0.0, 1.0, 0.5;
  auto cp = conjugate_point_bound(*s, x, y, 1.0, 5);
  ASSERT_TRUE(cp.found) << cp.note;
  EXPECT_NEAR(cp.t, pi, 1e-3);
}

TEST(ConjugatePoint, EuclideanRejected) {
  auto e = make_euclidean(2);
  EXPECT_THROW(conjugate_point_bound(*e, pt(0, 0), pt(1, 0), 1.0), PreconditionError);
  EXPECT_THROW(conjugate_point_bound(*e, pt(0, 0), pt(1, 0), 0.0), PreconditionError);
}

TEST(ConjugatePoint, ChartExitInconclusive) {
  // from the south pole the great circle runs through the point at infinity
  auto s = make_sphere(2);
  auto cp = conjugate_point_bound(*s, pt(0, 0), pt(1, 0), 1.0, 5);
  EXPECT_FALSE(cp.found);
  EXPECT_TRUE(cp.inconclusive);
}
