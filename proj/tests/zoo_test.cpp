#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "finsler/domain.hpp"
#include "finsler/fd.hpp"
#include "finsler/zoo.hpp"

namespace finsler {
namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

TEST(FunkUnitBall, WorkedValues) {
  EXPECT_NEAR(funk_unit_ball(v2(0, 0), v2(3, 4)), 5.0, 1e-15);
  EXPECT_NEAR(funk_unit_ball(v2(0.5, 0), v2(1, 0)), 2.0, 1e-15);
  EXPECT_NEAR(funk_unit_ball(v2(0.5, 0), v2(-1, 0)), 2.0 / 3.0, 1e-15);
  // x + y / F lands on the boundary
  const Vec x = v2(0.5, 0), y = v2(1, 0);
  EXPECT_NEAR((x + y / funk_unit_ball(x, y)).norm(), 1.0, 1e-15);
  EXPECT_THROW(funk_unit_ball(v2(1.0, 0), v2(1, 0)), DomainError);
}

TEST(FunkGeneral, ReproducesClosedFormAndMembership) {
  const auto ball = ConvexDomain::unit_ball(2);
  const auto q0 = ConvexDomain::quartic(2, 0.0);
  const auto q = ConvexDomain::quartic(2, 0.1);
  auto metric = make_funk(ball);
  for (const auto& s : halton_samples(*metric, 100)) {
    const double closed = funk_unit_ball(s.x, s.y);
    EXPECT_NEAR(funk_general(ball, s.x, s.y), closed, 1e-10 * closed);
    EXPECT_NEAR(funk_general(q0, s.x, s.y), closed, 1e-10 * closed);
    const double fq = funk_general(q, s.x, s.y);
    const Vec z = s.x + s.y / fq;
    EXPECT_LT(std::abs(q.phi<double>(as_span(z))), 1e-12);
  }
}

TEST(FunkGeneral, JetMatchesClosedFormOnBall) {
  const auto ball = ConvexDomain::unit_ball(2);
  const std::vector<double> x = {0.2, -0.35}, y = {0.6, 0.9};
  auto v = lift(x, y, {2, 2, 4});
  std::span<const Jet> all(v);
  const Jet implicit = funk_general(ball, all.subspan(0, 2), all.subspan(2, 2));
  const Jet closed = funk_unit_ball<Jet>(all.subspan(0, 2), all.subspan(2, 2));
  for (std::size_t k = 0; k < closed.size(); ++k)
    EXPECT_NEAR(implicit.coeffs()[k], closed.coeffs()[k], 1e-10 * (1 + std::abs(closed.coeffs()[k])));
}

TEST(Hilbert, WorkedValuesAndSymmetry) {
  auto h = make_hilbert(ConvexDomain::unit_ball(2));
  EXPECT_NEAR(h->eval(v2(0.5, 0), v2(1, 0)), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(h->eval(v2(0, 0), v2(0.3, -0.4)), 0.5, 1e-15);
  auto hq = make_hilbert(ConvexDomain::quartic(2, 0.1));
  for (const auto& s : halton_samples(*hq, 50))
    EXPECT_EQ(hq->eval(s.x, s.y), hq->eval(s.x, Vec(-s.y)));
}

TEST(Distance, FunkWorkedValueAndIdentity) {
  const auto ball = ConvexDomain::unit_ball(2);
  EXPECT_NEAR(funk_distance(ball, v2(0, 0), v2(0.5, 0)), std::log(2.0), 1e-14);
  EXPECT_EQ(funk_distance(ball, v2(0.1, 0.2), v2(0.1, 0.2)), 0.0);
  EXPECT_THROW(funk_distance(ball, v2(0, 0), v2(1.2, 0)), DomainError);
}

TEST(Distance, TriangleInequalityAndAsymmetry) {
  const auto dom = ConvexDomain::quartic(2, 0.1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  auto draw = [&] {
    while (true) {
      Vec p = v2(u(rng), u(rng));
      if (dom.contains(p)) return p;
    }
  };
  bool asymmetric = false;
  for (int k = 0; k < 1000; ++k) {
    const Vec p = draw(), q = draw(), r = draw();
    const double pq = funk_distance(dom, p, q);
    EXPECT_LE(pq, funk_distance(dom, p, r) + funk_distance(dom, r, q) + 1e-12);
    EXPECT_LE(hilbert_distance(dom, p, q),
              hilbert_distance(dom, p, r) + hilbert_distance(dom, r, q) + 1e-12);
    EXPECT_EQ(hilbert_distance(dom, p, q), hilbert_distance(dom, q, p));
    if (std::abs(pq - funk_distance(dom, q, p)) > 1e-3) asymmetric = true;
  }
  EXPECT_TRUE(asymmetric);
}

TEST(Okada, FunkSatisfiesHilbertAndEuclideanDoNot) {
  for (const auto& funk : {make_funk(ConvexDomain::unit_ball(2)),
                           make_funk(ConvexDomain::unit_ball(3)),
                           make_funk(ConvexDomain::quartic(2, 0.1))}) {
    double worst = 0;
    for (const auto& s : halton_samples(*funk, 50))
      worst = std::max(worst, okada_residual(*funk, s.x, s.y).cwiseAbs().maxCoeff());
    EXPECT_LT(worst, 1e-8) << funk->describe();
  }
  auto e = make_euclidean(2);
  const Vec r = okada_residual(*e, v2(0.5, 0), v2(1, 0));
  EXPECT_NEAR(r[0], -1.0, 1e-15);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  auto h = make_hilbert(ConvexDomain::unit_ball(2));
  EXPECT_GT(okada_residual(*h, v2(0.3, 0.1), v2(0.2, 1)).norm(), 1e-2);
}

TEST(Catalog, EveryMetricValidatesAndReversibilityIsHonest) {
  for (int n : {2, 3}) {
    for (const auto& m : zoo(n)) {
      const auto rep = check_metric(*m, 100);
      EXPECT_TRUE(rep.ok) << rep.failure;
      EXPECT_EQ(rep.samples, 100);
    }
  }
  auto funk = make_funk(ConvexDomain::unit_ball(2));
  EXPECT_GE(funk->eval(v2(0.5, 0), v2(1, 0)) / funk->eval(v2(0.5, 0), v2(-1, 0)), 2.0);
}

TEST(Catalog, RandersWithZeroBetaIsAlpha) {
  auto r = make_randers({2, AlphaKind::sphere, BetaKind::rotating, 0.0});
  auto s = make_sphere(2);
  for (const auto& t : halton_samples(*s, 20)) EXPECT_EQ(r->eval(t.x, t.y), s->eval(t.x, t.y));
}

TEST(Catalog, ConstructionRejectsInvalidParameters) {
  EXPECT_THROW(make_randers({2, AlphaKind::flat, BetaKind::rotating, 1.2}), MetricValidityError);
  EXPECT_THROW(make_quartic_norm(2, -0.9), MetricValidityError);
  EXPECT_THROW(make_metric("nope", 2), ConfigurationError);
  EXPECT_THROW(make_metric("randers", 2, {{"bogus", 1}}), ConfigurationError);
  EXPECT_THROW(make_metric("berwald_product", 2), ConfigurationError);
  EXPECT_THROW(ConvexDomain::parse("cube", 2), ConfigurationError);
  try {
    make_metric("nope", 2);
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("hilbert"), std::string::npos);
  }
  EXPECT_EQ(make_metric("hilbert", 2, {}, "quartic:0.2")->params().at("domain_eps"), 0.2);
}

TEST(Catalog, QuarticNormSweepIsPositiveDefinite) {
  auto q = make_quartic_norm(2, 0.1);
  for (int k = 0; k < 360; ++k) {
    const double a = k * std::numbers::pi / 180.0;
    const Jet f2 = q->squared_jet(Vec::Zero(2), v2(std::cos(a), std::sin(a)), 0, 2);
    const double g11 = 0.5 * f2.partial({}, make_index({2, 0}));
    const double g12 = 0.5 * f2.partial({}, make_index({1, 1}));
    const double g22 = 0.5 * f2.partial({}, make_index({0, 2}));
    EXPECT_GT(g11, 0);
    EXPECT_GT(g11 * g22 - g12 * g12, 0);
  }
}

// The order-(0,b) coefficients of F at (x, lambda y) are lambda^(1-|b|) times
// those at (x, y).
TEST(JetProperties, HomogeneityPropagates) {
  for (const auto& m : zoo(2)) {
    for (const auto& s : halton_samples(*m, 10)) {
      const Jet base = m->jet(s.x, s.y, 0, 4);
      for (double lambda : {0.5, 2.0, 3.0}) {
        const Jet scaled = m->jet(s.x, Vec(lambda * s.y), 0, 4);
        for (int b0 = 0; b0 <= 4; ++b0)
          for (int b1 = 0; b0 + b1 <= 4; ++b1) {
            const auto b = make_index({b0, b1});
            const double expect = std::pow(lambda, 1 - b0 - b1) * base.coeff({}, b);
            EXPECT_NEAR(scaled.coeff({}, b), expect, 1e-9 * (1 + std::abs(expect)))
                << m->describe();
          }
      }
    }
  }
}

TEST(JetProperties, PartialsUpToOrderThreeMatchOracleOnZoo) {
  for (int n : {2, 3}) {
    for (const auto& m : zoo(n)) {
      auto f = [&](std::span<const double> x, std::span<const double> y) {
        return m->eval(x, y);
      };
      int failures = 0;
      for (const auto& s : halton_samples(*m, 50, 200)) {
        const Jet j = m->jet(s.x, s.y, 2, 3);
        // every (a, b) with |a| + |b| <= 3
        std::vector<MultiIndex> xs, ys;
        for (int total = 0; total <= 3; ++total) {
          MultiIndex idx{};
          std::function<void(int, int)> rec = [&](int var, int left) {
            if (var == n - 1) {
              idx[var] = static_cast<std::uint8_t>(left);
              xs.push_back(idx);
              return;
            }
            for (int k = left; k >= 0; --k) {
              idx[var] = static_cast<std::uint8_t>(k);
              rec(var + 1, left - k);
            }
          };
          rec(0, total);
        }
        ys = xs;
        for (const auto& a : xs)
          for (const auto& b : ys) {
            int order = 0;
            for (int i = 0; i < n; ++i) order += a[i] + b[i];
            int ax = 0;
            for (int i = 0; i < n; ++i) ax += a[i];
            if (order == 0 || order > 3 || ax > 2) continue;
            const auto fd = fd_oracle(f, as_span(s.x), as_span(s.y), a, b);
            const double exact = j.partial(a, b);
            if (!fd.ok || std::abs(fd.value - exact) > std::max(1e-6 * std::abs(exact), 1e-8)) {
              if (++failures < 4)
                ADD_FAILURE() << m->describe() << " jet " << exact << " fd " << fd.value
                              << " est " << fd.error;
            }
          }
      }
      EXPECT_EQ(failures, 0) << m->describe();
    }
  }
}

}  // namespace
}  // namespace finsler
