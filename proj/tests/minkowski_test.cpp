#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "finsler/domain.hpp"
#include "finsler/fd.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/zoo.hpp"

namespace finsler {
namespace {

using std::numbers::pi;

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<MetricPtr> full_zoo() {
  auto z = zoo(2);
  for (auto& m : zoo(3)) z.push_back(m);
  return z;
}

TEST(FundamentalTensor, WorkedExamples) {
  auto e = make_euclidean(3);
  for (const auto& s : halton_samples(*e, 10))
    EXPECT_LT((fundamental_tensor(*e, s).g - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);

  auto sphere = make_sphere(2);
  const Vec x = v2(0.3, -0.4);
  const Mat g0 = fundamental_tensor(*sphere, {x, v2(1, 0)}).g;
  for (int k = 0; k < 20; ++k) {
    const double a = 2 * pi * k / 20;
    const Mat g = fundamental_tensor(*sphere, {x, v2(std::cos(a), std::sin(a))}).g;
    EXPECT_LT((g - g0).cwiseAbs().maxCoeff(), 1e-9 * g0.norm());
  }

  auto funk = make_funk(ConvexDomain::unit_ball(2));
  const Vec y = v2(1, 0);
  const auto ft = fundamental_tensor(*funk, {v2(0.5, 0), y});
  EXPECT_NEAR(y.dot(ft.g * y), 4.0, 4e-9);
}

TEST(FundamentalTensor, EulerSymmetryAndHomogeneityOnZoo) {
  for (const auto& m : full_zoo()) {
    for (const auto& s : halton_samples(*m, 50)) {
      const double f = m->eval(s.x, s.y);
      const auto ft = fundamental_tensor(*m, s);
      EXPECT_LT((ft.g - ft.g.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_NEAR(s.y.dot(ft.g * s.y), f * f, 1e-9 * f * f) << m->describe();
      EXPECT_GT(ft.det_g, 0.0);
      EXPECT_LT((ft.g * ft.g_inv - Mat::Identity(m->dim(), m->dim())).cwiseAbs().maxCoeff(), 1e-10);
      for (double lambda : {0.5, 2.0}) {
        const Mat gl = fundamental_tensor(*m, {s.x, Vec(lambda * s.y)}).g;
        EXPECT_LT((gl - ft.g).cwiseAbs().maxCoeff(), 1e-9 * ft.g.cwiseAbs().maxCoeff())
            << m->describe();
      }
    }
  }
}

TEST(FundamentalTensor, RejectsDegenerateNorm) {
  // y1 y2 is not the square of a norm: its Hessian is indefinite.
  auto q = make_quartic_norm(2, 0.1);
  try {
    (void)fundamental_tensor(*q, {v2(0, 0), v2(1, 0)});
  } catch (...) {
    FAIL() << "valid sample rejected";
  }
  const Jet bad = lift(std::vector<double>{0, 0}, std::vector<double>{1, 1}, {2, 0, 2})[2] *
                  lift(std::vector<double>{0, 0}, std::vector<double>{1, 1}, {2, 0, 2})[3];
  EXPECT_THROW((void)fundamental_tensor(bad, 2), MetricValidityError);
}

TEST(Cartan, VanishesExactlyForRiemannianMetrics) {
  for (int n : {2, 3}) {
    for (const auto& m : {make_euclidean(n), make_sphere(n), make_hyperbolic(n)}) {
      for (const auto& s : halton_samples(*m, 20)) {
        const auto d = cartan_data(*m, s);
        EXPECT_LT(d.C.max_abs(), 1e-10) << m->describe();
        EXPECT_LT(d.C_tilde.max_abs(), 1e-9) << m->describe();
        EXPECT_LT(d.I.norm(), 1e-10);
      }
    }
  }
  auto e = make_euclidean(2);
  EXPECT_LT(cartan_torsion(*e, {v2(0, 0), v2(1, 2)}).max_abs(), 1e-15);
}

TEST(Cartan, StructuralPropertiesOnZoo) {
  for (const auto& m : full_zoo()) {
    for (const auto& s : halton_samples(*m, 50)) {
      const auto d = cartan_data(*m, s);
      EXPECT_LT(d.C.symmetry_defect(), 1e-10);
      EXPECT_LT(d.C_tilde.symmetry_defect(), 1e-10);
      // C_y(y, u, v) = 0
      const Vec cy = d.C.partial_apply({s.y, s.y});
      const int n = m->dim();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Vec ei = Vec::Unit(n, i), ej = Vec::Unit(n, j);
          EXPECT_LT(std::abs(d.C.apply({s.y, ei, ej})), 1e-8) << m->describe();
        }
      EXPECT_LT(cy.norm(), 1e-8);
      EXPECT_LT(std::abs(d.I.dot(s.y)), 1e-8);
      for (double lambda : {0.5, 2.0}) {
        const auto dl = cartan_data(*m, {s.x, Vec(lambda * s.y)});
        const Tensor expect = d.C * (1.0 / lambda);
        EXPECT_LT((dl.C - expect).max_abs(), 1e-8 * (1 + expect.max_abs())) << m->describe();
      }
    }
  }
}

TEST(Cartan, QuarticNormMatchesDerivativeOfFundamentalTensor) {
  auto q = make_quartic_norm(3, 0.1);
  for (const auto& s : halton_samples(*q, 10)) {
    const Tensor C = cartan_torsion(*q, s);
    EXPECT_GT(C.max_abs(), 1e-3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        auto gij = [&](std::span<const double> y) {
          return fundamental_tensor(*q, {s.x, Eigen::Map<const Vec>(y.data(), 3)}).g(i, j);
        };
        for (int k = 0; k < 3; ++k) {
          std::vector<int> o = {0, 0, 0};
          o[static_cast<std::size_t>(k)] = 1;
          const auto r = fd_oracle(gij, as_span(s.y), o);
          ASSERT_TRUE(r.ok);
          EXPECT_NEAR(C(i, j, k), 0.5 * r.value, 1e-6 * std::max(1.0, std::abs(C(i, j, k))));
        }
      }
  }
}

TEST(Cartan, TildeIsTheDerivativeOfC) {
  auto r = make_randers({2, AlphaKind::flat, BetaKind::rotating, 0.3});
  for (const auto& s : halton_samples(*r, 5)) {
    const Tensor Ct = cartan_tilde(*r, s);
    for (int l = 0; l < 2; ++l) {
      auto c001 = [&](std::span<const double> y) {
        return cartan_torsion(*r, {s.x, Eigen::Map<const Vec>(y.data(), 2)})(0, 0, 1);
      };
      std::vector<int> o = {0, 0};
      o[static_cast<std::size_t>(l)] = 1;
      const auto fd = fd_oracle(c001, as_span(s.y), o);
      EXPECT_NEAR(Ct(0, 0, 1, l), fd.value, 1e-6 * std::max(1.0, std::abs(fd.value)));
    }
  }
}

TEST(Distortion, EuclideanZeroAndDerivativeIdentity) {
  auto e = make_euclidean(2);
  EXPECT_NEAR(distortion(*e, {v2(0.1, 0.2), v2(0.3, 1)}, 1.0), 0.0, 1e-15);
  EXPECT_THROW(distortion(*e, {v2(0, 0), v2(1, 0)}, 0.0), ConfigurationError);
  for (const auto& m : {make_quartic_norm(2, 0.1), make_quartic_norm(3, 0.1),
                        make_randers({2, AlphaKind::flat, BetaKind::rotating, 0.3}),
                        make_randers({3, AlphaKind::flat, BetaKind::rotating, 0.3})}) {
    for (const auto& s : halton_samples(*m, 20)) {
      const double sigma = density(*m, s.x);
      EXPECT_LT(distortion_derivative_check(*m, s, sigma), 1e-6) << m->describe();
    }
  }
}

TEST(Distortion, ScaleInvariantOnZoo) {
  for (const auto& m : zoo(2)) {
    for (const auto& s : halton_samples(*m, 50)) {
      const double sigma = density(*m, s.x);
      const double t = distortion(*m, s, sigma);
      for (double lambda : {0.5, 2.0})
        EXPECT_NEAR(distortion(*m, {s.x, Vec(lambda * s.y)}, sigma), t, 1e-9) << m->describe();
    }
  }
}

TEST(MeanCartan, RandersNonzeroAndDeickeProperty) {
  auto r = make_randers({2, AlphaKind::flat, BetaKind::rotating, 0.3});
  const auto d = cartan_data(*r, {v2(0.1, 0.2), v2(0.6, 0.8)});
  EXPECT_GT(d.I.norm(), 1e-3);
  for (const auto& m : full_zoo()) {
    for (const auto& s : halton_samples(*m, 50)) {
      const auto cd = cartan_data(*m, s);
      EXPECT_EQ(cd.I.norm() < 1e-8, cd.C.max_abs() < 1e-8) << m->describe();
    }
  }
}

TEST(BhDensity, ClosedFormsAndOracles) {
  auto e = make_euclidean(2);
  EXPECT_NEAR(bh_density(*e, v2(0.3, 0.3)), 1.0, 1e-12);
  auto sphere = make_sphere(2);
  for (const auto& s : halton_samples(*sphere, 5)) {
    const double c = 1.0 + s.x.squaredNorm();
    EXPECT_NEAR(bh_density(*sphere, s.x), 4.0 / (c * c), 1e-6);
  }
  auto funk = make_funk(ConvexDomain::unit_ball(2));
  EXPECT_NEAR(bh_density(*funk, v2(0, 0)), 1.0, 1e-10);
  for (int n : {2, 3}) {
    for (const auto& m : zoo(n)) {
      for (const auto& s : halton_samples(*m, 3)) {
        const double q = bh_density(*m, s.x);
        if (auto closed = m->closed_bh_density(as_span(s.x)))
          EXPECT_NEAR(q, *closed, 1e-6 * *closed) << m->describe();
        const auto jet = density_jet(*m, s.x, 1);
        EXPECT_NEAR(jet.value(), q, 1e-6 * q) << m->describe();
      }
    }
  }
}

TEST(BhDensity, QuadratureAgreesWithMonteCarlo) {
  for (const auto& m : {make_funk(ConvexDomain::quartic(2, 0.1)),
                        make_randers({2, AlphaKind::flat, BetaKind::rotating, 0.3}),
                        make_quartic_norm(3, 0.1)}) {
    const auto s = halton_samples(*m, 1)[0];
    const auto q = bh_density_quadrature(*m, s.x);
    const auto mc = bh_density_mc(*m, s.x, 1000000, 42);
    EXPECT_LT(std::abs(q.value - mc.value), 3 * std::hypot(q.stderr_, mc.stderr_))
        << m->describe();
    EXPECT_NO_THROW(bh_density_checked(*m, s.x, 200000, 3));
    const auto again = bh_density_mc(*m, s.x, 1000000, 42);
    EXPECT_EQ(again.value, mc.value);
  }
}

TEST(BhDensity, JetDerivativeMatchesOracle) {
  auto h = make_hilbert(ConvexDomain::quartic(2, 0.1));
  const Vec x = v2(0.2, -0.1);
  const Jet d = density_jet(*h, x, 1);
  for (int i = 0; i < 2; ++i) {
    auto f = [&](std::span<const double> p) { return bh_density(*h, Eigen::Map<const Vec>(p.data(), 2)); };
    std::vector<int> o = {0, 0};
    o[static_cast<std::size_t>(i)] = 1;
    const auto r = fd_oracle(f, as_span(x), o);
    EXPECT_NEAR(partial(d, {i}, {}), r.value, 1e-6 * std::max(1.0, std::abs(r.value)));
  }
}

TEST(Indicatrix, EuclideanIsTheRoundSphere) {
  auto e = make_euclidean(3);
  Vec y(3), u(3), v(3);
  y << 0, 0, 1;
  u << 1, 0, 0;
  v << 0.3, 1, 0;
  EXPECT_NEAR(indicatrix_sectional(*e, y, u, v), 1.0, 1e-12);
  const Vec r = indicatrix_riemann(*e, y, u, v, v);
  EXPECT_LT((r - (v.dot(v) * u - u.dot(v) * v)).norm(), 1e-12);
  EXPECT_THROW(indicatrix_riemann(*e, y, y, v, v), PreconditionError);
  EXPECT_THROW(indicatrix_riemann(*make_sphere(3), y, u, v, v), PreconditionError);
}

TEST(Indicatrix, FormulaMatchesGaussOracleOnQuarticNorm) {
  auto q = make_quartic_norm(3, 0.1);
  bool non_round = false;
  for (int k = 0; k < 10; ++k) {
    const double s = 0.3 + 0.25 * k, t = 0.2 + 0.55 * k;
    const auto patch = indicatrix_patch(*q, s, t);
    const double formula = indicatrix_sectional(*q, patch.y, patch.p_s, patch.p_t);
    const double oracle = indicatrix_gauss_oracle(*q, s, t);
    EXPECT_NEAR(formula, oracle, 1e-4 * std::abs(oracle)) << "point " << k;
    if (std::abs(formula - 1.0) > 1e-3) non_round = true;
  }
  EXPECT_TRUE(non_round);
}

TEST(Santalo, EuclideanAndQuartic) {
  EXPECT_NEAR(santalo_volume(*make_euclidean(2)), 2 * pi, 1e-8);
  EXPECT_NEAR(santalo_volume(*make_euclidean(3)), 4 * pi, 1e-5);
  EXPECT_LT(santalo_volume(*make_quartic_norm(2, 0.1)), 2 * pi - 1e-4);
  EXPECT_LT(santalo_volume(*make_quartic_norm(3, 0.1)), 4 * pi - 1e-4);
  EXPECT_THROW(santalo_volume(*make_randers({2, AlphaKind::flat, BetaKind::constant, 0.3})),
               PreconditionError);
  EXPECT_NEAR(indicatrix_bh_volume(*make_euclidean(2)), 2 * pi, 1e-8);
  EXPECT_GT(indicatrix_bh_volume(*make_quartic_norm(2, 0.1)), 0.0);
}

}  // namespace
}  // namespace finsler
