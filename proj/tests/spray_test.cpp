#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "finsler/domain.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/spray.hpp"
#include "finsler/zoo.hpp"

namespace finsler {
namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

// Round sphere in stereographic coordinates, a = e^{2 phi} delta with
// phi = ln 2 - ln(1 + |x|^2):  Gamma^i_jk = d_ij phi_k + d_ik phi_j - d_jk phi_i.
Vec sphere_christoffel_G(const Vec& x, const Vec& y) {
  const Vec dphi = -2.0 * x / (1.0 + x.squaredNorm());
  const int n = static_cast<int>(x.size());
  Vec G = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double gamma = (i == j ? dphi[k] : 0.0) + (i == k ? dphi[j] : 0.0) -
                             (j == k ? dphi[i] : 0.0);
        G[i] += 0.5 * gamma * y[j] * y[k];
      }
  return G;
}

TEST(Spray, MinkowskiNormsHaveNoSpray) {
  for (auto m : {make_euclidean(2), make_quartic_norm(3)}) {
    for (const auto& s : halton_samples(*m, 20)) {
      const auto sc = spray_coeffs(*m, s);
      EXPECT_LT(sc.G.cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_LT(sc.N.cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(Spray, SphereMatchesChristoffelOracle) {
  for (int n : {2, 3}) {
    auto m = make_sphere(n);
    for (const auto& s : halton_samples(*m, 50)) {
      const Vec G = spray_G(*m, s.x, s.y);
      const Vec oracle = sphere_christoffel_G(s.x, s.y);
      EXPECT_LT((G - oracle).cwiseAbs().maxCoeff(), 1e-8 * (1 + oracle.norm()));
    }
  }
}

TEST(Spray, FunkGeodesicsThroughOriginAreRadial) {
  auto m = make_funk(ConvexDomain::unit_ball(2));
  for (double a = 0.1; a < 6.3; a += 0.7) {
    const Vec y = v2(std::cos(a), std::sin(a));
    const Vec G = spray_G(*m, v2(0, 0), y);
    EXPECT_GT(G.norm(), 0.1);
    EXPECT_LT(std::abs(cross2(G, y)), 1e-12);
  }
}

TEST(Spray, HomogeneityAndEulerOnZoo) {
  for (int n : {2, 3}) {
    for (const auto& m : zoo(n)) {
      for (const auto& s : halton_samples(*m, 25)) {
        const auto sc = spray_coeffs(*m, s);
        const double scale = 1e-8 * (1 + sc.G.norm());
        for (double lam : {0.5, 2.0}) {
          const Vec Gl = spray_G(*m, s.x, lam * s.y);
          EXPECT_LT((Gl - lam * lam * sc.G).norm(), lam * lam * scale) << m->describe();
        }
        EXPECT_LT((sc.N * s.y - 2.0 * sc.G).norm(), scale) << m->describe();
      }
    }
  }
}

TEST(Spray, NIsFiberDerivativeOfG) {
  auto m = make_randers({2, AlphaKind::sphere, BetaKind::rotating, 0.3});
  for (const auto& s : halton_samples(*m, 10)) {
    const Mat N = spray_coeffs(*m, s).N;
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-5;
      Vec e = Vec::Zero(2);
      e[j] = h;
      const Vec d = (spray_G(*m, s.x, s.y + e) - spray_G(*m, s.x, s.y - e)) / (2 * h);
      EXPECT_LT((d - N.col(j)).norm(), 1e-8);
    }
  }
}

TEST(Spray, JetSolveMatchesDenseSolve) {
  Mat A(3, 3);
  A << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  Vec b = v3(1, -2, 0.5);
  std::vector<std::vector<Jet>> J(3, std::vector<Jet>(3));
  std::vector<Jet> rhs(3);
  const JetSpec spec{2, 0, 0};
  for (int i = 0; i < 3; ++i) {
    rhs[static_cast<std::size_t>(i)] = Jet(spec, b[i]);
    for (int j = 0; j < 3; ++j)
      J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Jet(spec, A(i, j));
  }
  const auto z = jet_solve(J, rhs);
  const Vec ref = A.lu().solve(b);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(z[static_cast<std::size_t>(i)].value(), ref[i], 1e-14);
}

TEST(Geodesic, EuclideanLinesAreExact) {
  auto m = make_euclidean(3);
  const Vec x0 = v3(0.1, -0.2, 0.3), y0 = v3(1, 2, -0.5);
  const auto path = integrate_geodesic(*m, x0, y0, 3.0);
  EXPECT_FALSE(path.exited);
  EXPECT_LT(path.max_el_residual, 1e-12);
  for (const auto& s : path.samples) EXPECT_LT((s.x - (x0 + s.t * y0)).norm(), 1e-12);
  EXPECT_LT((exp_map(*m, x0, y0) - (x0 + y0)).norm(), 1e-12);
}

TEST(Geodesic, FunkRadialDistanceIsArcLength) {
  const auto ball = ConvexDomain::unit_ball(2);
  auto m = make_funk(ball);
  GeodesicOptions o;
  o.unit_speed = true;
  const Vec x0 = v2(0, 0);
  const auto path = integrate_geodesic(*m, x0, v2(1, 0), 3.0, o);
  EXPECT_FALSE(path.exited);
  EXPECT_LT(path.max_el_residual, 1e-6);
  for (double t = 0.25; t <= 3.0; t += 0.25) {
    const auto s = path.at(t);
    EXPECT_LT(std::abs(s.x[1]), 1e-12);
    EXPECT_NEAR(funk_distance(ball, x0, s.x), t, 1e-6);
  }
}

TEST(Geodesic, HilbertSpeedIsConserved) {
  auto m = make_hilbert(ConvexDomain::unit_ball(2));
  const Vec x0 = v2(0.2, -0.1), y0 = v2(0.3, 0.7);
  const auto path = integrate_geodesic(*m, x0, y0, 5.0);
  EXPECT_FALSE(path.exited);
  const double f0 = m->eval(x0, y0);
  double drift = 0.0;
  for (const auto& s : path.samples) drift = std::max(drift, std::abs(m->eval(s.x, s.v) / f0 - 1));
  for (double t = 0.05; t < 5.0; t += 0.1) {
    const auto s = path.at(t);
    drift = std::max(drift, std::abs(m->eval(s.x, s.v) / f0 - 1));
  }
  EXPECT_LT(drift, 1e-7);
  EXPECT_LT(path.max_el_residual, 1e-6);
}

TEST(Geodesic, ZooSpeedConservationAndResidual) {
  for (int n : {2, 3}) {
    for (const auto& m : zoo(n)) {
      const auto s = halton_samples(*m, 1, 7).front();
      const auto path = integrate_geodesic(*m, s.x, s.y, 1.0);
      const double f0 = m->eval(s.x, s.y);
      for (const auto& p : path.samples)
        EXPECT_NEAR(m->eval(p.x, p.v) / f0, 1.0, 1e-7) << m->describe();
      EXPECT_LT(path.max_el_residual, 1e-6) << m->describe();
    }
  }
}

TEST(Geodesic, ProjectivelyFlatMetricsHaveStraightGeodesics) {
  for (auto m : {make_funk(ConvexDomain::unit_ball(2)), make_hilbert(ConvexDomain::unit_ball(2)),
                 make_funk(ConvexDomain::quartic(2, 0.1))}) {
    const Vec x0 = v2(0.3, -0.2), y0 = v2(-0.4, 0.6);
    const auto path = integrate_geodesic(*m, x0, y0, 2.0);
    for (const auto& s : path.samples)
      EXPECT_LT(std::abs(cross2(s.x - x0, y0)) / y0.norm(), 1e-8) << m->describe();
  }
}

TEST(Geodesic, ClosedBetaRandersSharesAlphaGeodesics) {
  // Projectively equivalent sprays: G_F - G_alpha is parallel to y.
  for (auto alpha : {AlphaKind::flat, AlphaKind::sphere, AlphaKind::hyperbolic}) {
    auto F = make_randers({2, alpha, BetaKind::exact, 0.2});
    auto A = make_randers({2, alpha, BetaKind::zero, 0.0});
    for (const auto& s : halton_samples(*F, 30)) {
      const Vec d = spray_G(*F, s.x, s.y) - spray_G(*A, s.x, s.y);
      EXPECT_LT(std::abs(cross2(d, s.y)), 1e-10 * (1 + d.norm()));
    }
    // and the traced point sets agree
    const Vec x0 = v2(0.1, 0.2), y0 = v2(0.5, -0.3);
    const auto pf = integrate_geodesic(*F, x0, y0, 1.0);
    const auto pa = integrate_geodesic(*A, x0, y0, 3.0);
    for (const auto& s : pf.samples) {
      double best = 1e9;
      for (std::size_t k = 0; k + 1 < pa.samples.size(); ++k) {
        // golden-section on the dense output of each segment
        double lo = pa.samples[k].t, hi = pa.samples[k + 1].t;
        for (int it = 0; it < 60; ++it) {
          const double a = hi - 0.618 * (hi - lo), b = lo + 0.618 * (hi - lo);
          if ((pa.at(a).x - s.x).norm() < (pa.at(b).x - s.x).norm()) hi = b;
          else lo = a;
        }
        best = std::min(best, (pa.at(0.5 * (lo + hi)).x - s.x).norm());
      }
      EXPECT_LT(best, 1e-7);
    }
  }
}

TEST(Geodesic, ChartExitSetsFlag) {
  // Funk is forward complete only: run backwards from the centre along e1,
  // c(t) = 1 - e^{-t} reaches the boundary point -e1 at t = -ln 2.
  auto m = make_funk(ConvexDomain::unit_ball(2));
  const auto back = integrate_geodesic(*m, v2(0, 0), v2(1, 0), -2.0);
  EXPECT_TRUE(back.reversed);
  EXPECT_TRUE(back.exited);
  EXPECT_NEAR(back.t_end, -std::log(2.0), 1e-6);
  const auto fwd = integrate_geodesic(*m, v2(0, 0), v2(1, 0), 5.0);
  EXPECT_FALSE(fwd.exited);
  auto e = make_euclidean(2);
  EXPECT_THROW(integrate_geodesic(*e, v2(0, 0), v2(0, 0), 1.0), DomainError);
}

TEST(Geodesic, DenseOutputRangeAndReverse) {
  auto m = make_sphere(2);
  const auto fwd = integrate_geodesic(*m, v2(0.1, 0.2), v2(1, 0.5), 1.0);
  EXPECT_THROW(fwd.at(1.5), RangeError);
  const auto end = fwd.samples.back();
  const auto back = integrate_geodesic(*m, end.x, end.v, -1.0);
  EXPECT_TRUE(back.reversed);
  EXPECT_LT((back.samples.back().x - v2(0.1, 0.2)).norm(), 1e-9);
  EXPECT_LT((back.at(-0.5).x - fwd.at(0.5).x).norm(), 1e-8);
}

TEST(ExpMap, ContinuityAtOrigin) {
  for (const auto& m : zoo(2)) {
    const auto s = halton_samples(*m, 1, 3).front();
    EXPECT_LT((exp_map(*m, s.x, 1e-8 * s.y) - s.x).norm(), 1e-7) << m->describe();
  }
}

TEST(ExpMap, SphereAntipode) {
  auto m = make_sphere(2);
  const Vec x = v2(0.5, 0), y = v2(0, 1);
  const Vec yn = std::numbers::pi * y / m->eval(x, y);
  // x = (0.5, 0) is the stereographic image of a point whose antipode maps to -x/|x|^2
  EXPECT_LT((exp_map(*m, x, yn) - v2(-2, 0)).norm(), 1e-5);
  // the great circle through x in direction e2 is the chart circle centred at (-0.75, 0)
  const auto path = integrate_geodesic(*m, x, yn, 1.0);
  for (const auto& s : path.samples) EXPECT_NEAR((s.x - v2(-0.75, 0)).norm(), 1.25, 1e-8);
}

TEST(ExpMap, ChartExitIsRangeError) {
  // The sphere chart is cut off at |x| = 1000; the great circle along the x1
  // axis from (0.5, 0) reaches the north pole after arc length pi - 2 atan(0.5).
  auto m = make_sphere(2);
  const Vec x = v2(0.5, 0), y = v2(1, 0);
  const Vec u = y / m->eval(x, y);
  EXPECT_NO_THROW(exp_map(*m, x, 2.0 * u));
  EXPECT_THROW(exp_map(*m, x, 2.3 * u), RangeError);
}

TEST(Transport, EuclideanIsIdentity) {
  auto m = make_euclidean(2);
  const std::vector<Vec> frame = {v2(1, 0), v2(0.3, 1)};
  const auto r = parallel_transport(*m, v2(0, 0), v2(1, 1), 2.0, frame);
  EXPECT_LT(r.gram_drift, 1e-12);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LT((r.frame_out[k] - frame[k]).norm(), 1e-14);
}

TEST(Transport, GramPreservedOnZoo) {
  for (int n : {2, 3}) {
    for (const auto& m : zoo(n)) {
      const auto s = halton_samples(*m, 1, 11).front();
      std::vector<Vec> frame;
      frame.push_back(s.y);
      for (int k = 0; k < n; ++k) frame.push_back(Vec::Unit(n, k));
      const auto r = parallel_transport(*m, s.x, s.y, 1.0, frame);
      EXPECT_LT(r.gram_drift, 1e-7) << m->describe();
      // the tangent is parallel along its own geodesic
      EXPECT_LT((r.frame_out[0] - r.path.samples.back().v).norm(), 1e-8) << m->describe();
    }
  }
}

TEST(Transport, BerwaldPreservesMinkowskiNorm) {
  auto m = make_berwald_product(0.5);
  const Vec x = v3(0.1, -0.2, 0.3), y = v3(0.6, 0.2, -0.4);
  const std::vector<Vec> frame = {v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1), v3(0.3, -0.5, 0.8)};
  const auto r = parallel_transport(*m, x, y, 1.5, frame);
  for (const auto& s : r.path.samples)
    for (std::size_t k = 0; k < frame.size(); ++k)
      EXPECT_NEAR(m->eval(s.x, s.frame[k]), m->eval(x, frame[k]), 1e-6);
}

TEST(Transport, AlongArbitraryCurve) {
  // On a Riemannian metric transport along any curve is an isometry.
  auto m = make_sphere(2);
  Curve c = [](double t) {
    return std::pair<Vec, Vec>{v2(0.4 * std::cos(t), 0.3 * std::sin(2 * t)),
                               v2(-0.4 * std::sin(t), 0.6 * std::cos(2 * t))};
  };
  const std::vector<Vec> frame = {v2(1, 0), v2(0, 1)};
  const auto r = parallel_transport(*m, c, 0.0, 2.0, frame, 4000);
  EXPECT_LT(r.gram_drift, 1e-7);
}

TEST(Covariant, TangentOfGeodesicHasZeroDerivative) {
  // U(x) = y-field of a family of geodesics sampled by the spray: for a
  // Euclidean line field D_y U = 0; for the sphere compare with -2G + N U.
  auto e = make_euclidean(2);
  auto U = [](const Vec&) { return v2(0.3, -0.7); };
  EXPECT_LT(covariant_derivative(*e, U, v2(0.1, 0.1), v2(1, 2)).norm(), 1e-10);

  auto m = make_funk(ConvexDomain::unit_ball(2));
  const Vec x0 = v2(0.1, 0.2), y0 = v2(0.5, -0.3);
  const auto path = integrate_geodesic(*m, x0, y0, 0.5);
  // D_c' c' = c'' + 2G(c') along the path
  for (double t : {0.1, 0.25, 0.4}) {
    const auto s = path.at(t);
    const Vec dd = s.a + spray_coeffs(*m, {s.x, s.v}).N * s.v;
    EXPECT_LT((dd - (s.a + 2 * spray_G(*m, s.x, s.v))).norm(), 1e-10);
    EXPECT_LT((s.a + 2 * spray_G(*m, s.x, s.v)).norm(), 1e-6);
  }
  // a position-dependent field
  auto W = [](const Vec& x) { return v2(x[0] * x[1], 1 + x[0]); };
  const Vec x = v2(0.2, 0.1), y = v2(0.4, 0.9);
  const Vec expect = v2(y[0] * x[1] + x[0] * y[1], y[0]) + spray_coeffs(*m, {x, y}).N * W(x);
  EXPECT_LT((covariant_derivative(*m, W, x, y) - expect).norm(), 1e-8);
}

TEST(PathCsv, HeaderAndRows) {
  auto m = make_euclidean(2);
  const auto path = integrate_geodesic(*m, v2(0, 0), v2(1, 0), 1.0);
  const auto csv = path_csv(*m, path, 0.25);
  EXPECT_EQ(csv.rfind("# finsler-path v1", 0), 0u);
  EXPECT_NE(csv.find("t,x1,x2,v1,v2,F\n"), std::string::npos);
  int rows = 0;
  for (char c : csv) rows += c == '\n';
  EXPECT_EQ(rows, 2 + 5);
}

}  // namespace
}  // namespace finsler
