#include "finsler/curvature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "finsler/fd.hpp"
#include "finsler/minkowski.hpp"

namespace finsler {

std::vector<double> five_point(const std::function<std::vector<double>(double)>& f, double h,
                               int order) {
  if (order != 1 && order != 2) throw ConfigurationError("five_point: order must be 1 or 2");
  const auto f0 = order == 2 ? f(0.0) : std::vector<double>{};
  auto stencil = [&](double s) {
    const auto m2 = f(-2 * s), m1 = f(-s), p1 = f(s), p2 = f(2 * s);
    std::vector<double> d(m1.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (order == 1)
        d[k] = (m2[k] - 8 * m1[k] + 8 * p1[k] - p2[k]) / (12 * s);
      else
        d[k] = (-m2[k] + 16 * m1[k] - 30 * f0[k] + 16 * p1[k] - p2[k]) / (12 * s * s);
    }
    return d;
  };
  const auto coarse = stencil(h), fine = stencil(h / 2);
  std::vector<double> out(coarse.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (16 * fine[k] - coarse[k]) / 15;
  return out;
}

namespace {

GeodesicOptions tight() {
  GeodesicOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-12;
  o.max_step = 0.05;
  return o;
}

std::vector<Vec> coordinate_frame(int n) {
  std::vector<Vec> f;
  for (int k = 0; k < n; ++k) f.push_back(Vec::Unit(n, k));
  return f;
}

// d/dt (order 1) or d^2/dt^2 (order 2) at t = 0 of fn(c(t)) along the geodesic
// with c'(0) = y, stepping dt in arc length.
std::vector<double> along_geodesic(const FinslerMetric& metric, const TangentSample& s, double dt,
                                   const std::vector<Vec>& frame,
                                   const std::function<std::vector<double>(const PathSample&)>& fn,
                                   int order) {
  const double h = dt / metric.eval(s.x, s.y);
  // the two stencils of five_point touch +-h/2, +-h, +-2h
  const std::vector<double> times = {-2 * h, -h, -h / 2, 0.0, h / 2, h, 2 * h};
  const auto samples = geodesic_samples(metric, s.x, s.y, times, tight(), frame);
  std::map<double, std::vector<double>> values;
  for (std::size_t k = 0; k < times.size(); ++k) values[times[k]] = fn(samples[k]);
  return five_point(
      [&](double t) {
        auto it = values.find(t);
        if (it == values.end()) throw ConfigurationError("along_geodesic: stencil point missing");
        return it->second;
      },
      h, order);
}

// Tensor T on the coordinate basis contracted with a frame: T(U_a, U_b, ...).
std::vector<double> in_frame(const Tensor& T, const std::vector<Vec>& frame) {
  const int r = T.rank();
  const auto m = static_cast<int>(frame.size());
  Tensor out(m, r);
  for (std::size_t f = 0; f < out.data().size(); ++f) {
    const auto idx = unflatten(f, m, r);
    std::vector<Vec> args;
    for (int k : idx) args.push_back(frame[static_cast<std::size_t>(k)]);
    out.data()[f] = T.apply(args);
  }
  return out.data();
}

Tensor from_flat(const std::vector<double>& v, int n, int rank) {
  Tensor t(n, rank);
  t.data() = v;
  return t;
}

Jet jet_det(std::vector<std::vector<Jet>> A) {
  const std::size_t n = A.size();
  Jet det = A[0][0] * 0.0 + 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c].value()) > std::abs(A[piv][c].value())) piv = r;
    if (A[piv][c].value() == 0.0) throw MetricValidityError("singular fundamental tensor");
    if (piv != c) {
      std::swap(A[c], A[piv]);
      det = -det;
    }
    det *= A[c][c];
    const Jet inv = 1.0 / A[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const Jet m = A[r][c] * inv;
      for (std::size_t k = c + 1; k < n; ++k) A[r][k] -= m * A[c][k];
    }
  }
  return det;
}

}  // namespace

BerwaldTensor berwald_curvature(const FinslerMetric& metric, const TangentSample& s) {
  const int n = metric.dim();
  const auto G = spray_jets(metric, s.x, s.y, 0, 3);
  BerwaldTensor b{Tensor(n, 4), Mat::Zero(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k)
        for (int l = k; l < n; ++l) {
          const double v = partial(G[static_cast<std::size_t>(i)], {}, {j, k, l});
          for (auto [a, c, d] : {std::array{j, k, l}, std::array{j, l, k}, std::array{k, j, l},
                                 std::array{k, l, j}, std::array{l, j, k}, std::array{l, k, j}})
            b.B(i, a, c, d) = v;
        }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) b.E(j, k) += 0.5 * b.B(i, i, j, k);
  return b;
}

Vec berwald_apply(const Tensor& B, const Vec& u, const Vec& v, const Vec& w) {
  const int n = B.dim();
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out[i] += B(i, j, k, l) * u[j] * v[k] * w[l];
  return out;
}

Tensor landsberg_from_berwald(const FinslerMetric& metric, const TangentSample& s) {
  const int n = metric.dim();
  const auto b = berwald_curvature(metric, s);
  const Vec gy = fundamental_tensor(metric, s).g * s.y;
  Tensor L(n, 3);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += gy[i] * b.B(i, j, k, l);
        L(j, k, l) = -0.5 * acc;
      }
  return L;
}

Tensor landsberg_by_transport(const FinslerMetric& metric, const TangentSample& s, double dt) {
  const int n = metric.dim();
  auto fn = [&](const PathSample& p) {
    return in_frame(cartan_torsion(metric, {p.x, p.v}), p.frame);
  };
  return from_flat(along_geodesic(metric, s, dt, coordinate_frame(n), fn, 1), n, 3);
}

Tensor landsberg_dot(const FinslerMetric& metric, const TangentSample& s, double dt) {
  const int n = metric.dim();
  auto fn = [&](const PathSample& p) {
    return in_frame(landsberg_from_berwald(metric, {p.x, p.v}), p.frame);
  };
  return from_flat(along_geodesic(metric, s, dt, coordinate_frame(n), fn, 1), n, 3);
}

Tensor landsberg_tilde(const FinslerMetric& metric, const TangentSample& s) {
  const int n = metric.dim();
  const double h = 1e-2 * s.y.norm();
  Tensor out(n, 4);
  for (int m = 0; m < n; ++m) {
    const auto d = five_point(
        [&](double t) {
          return landsberg_from_berwald(metric, {s.x, s.y + t * Vec::Unit(n, m)}).data();
        },
        h, 1);
    for (std::size_t f = 0; f < d.size(); ++f) {
      const auto idx = unflatten(f, n, 3);
      out(idx[0], idx[1], idx[2], m) = d[f];
    }
  }
  return out;
}

Vec mean_landsberg(const FinslerMetric& metric, const TangentSample& s) {
  const int n = metric.dim();
  const Tensor L = landsberg_from_berwald(metric, s);
  const Mat gi = fundamental_tensor(metric, s).g_inv;
  Vec J = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J[k] += gi(i, j) * L(i, j, k);
  return J;
}

Vec mean_landsberg_by_transport(const FinslerMetric& metric, const TangentSample& s, double dt) {
  const int n = metric.dim();
  auto fn = [&](const PathSample& p) {
    const TangentSample q{p.x, p.v};
    const Vec I = mean_cartan(fundamental_tensor(metric, q), cartan_torsion(metric, q));
    std::vector<double> out;
    for (const auto& u : p.frame) out.push_back(I.dot(u));
    return out;
  };
  const auto d = along_geodesic(metric, s, dt, coordinate_frame(n), fn, 1);
  return Eigen::Map<const Vec>(d.data(), n);
}

LandsbergTensor landsberg_curvature(const FinslerMetric& metric, const TangentSample& s) {
  return {landsberg_from_berwald(metric, s), landsberg_dot(metric, s), landsberg_tilde(metric, s),
          mean_landsberg(metric, s)};
}

DensityField bh_density_field(const FinslerMetric& metric) {
  DensityField f;
  f.value = [&metric](const Vec& x) { return density(metric, x); };
  f.gradient = [&metric](const Vec& x) {
    const Jet d = density_jet(metric, x, 1);
    Vec g(metric.dim());
    for (int k = 0; k < metric.dim(); ++k) g[k] = partial(d, {k}, {});
    return g;
  };
  return f;
}

SData s_curvature(const FinslerMetric& metric, const TangentSample& s,
                  const std::optional<DensityField>& field, double dt) {
  const DensityField f = field ? *field : bh_density_field(metric);
  auto tau = [&](const PathSample& p) {
    const double det = fundamental_tensor(metric, {p.x, p.v}).det_g;
    return std::vector<double>{0.5 * std::log(det) - std::log(f.value(p.x))};
  };
  SData d;
  d.S = along_geodesic(metric, s, dt, {}, tau, 1)[0];
  d.S_dot = along_geodesic(metric, s, dt, {}, tau, 2)[0];
  return d;
}

double s_curvature_jet(const FinslerMetric& metric, const TangentSample& s, double sigma,
                       const Vec& grad_sigma) {
  const int n = metric.dim();
  const Jet f2 = metric.squared_jet(s.x, s.y, 1, 3);
  std::vector<std::vector<Jet>> g(static_cast<std::size_t>(n), std::vector<Jet>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    const Jet di = f2.d_y(i);
    for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0.5 * di.d_y(j);
  }
  const Jet lndet = log(jet_det(std::move(g)));
  const Vec G = spray_G(metric, s.x, s.y);
  double S = -s.y.dot(grad_sigma) / sigma;
  for (int k = 0; k < n; ++k)
    S += 0.5 * s.y[k] * partial(lndet, {k}, {}) - G[k] * partial(lndet, {}, {k});
  return S;
}

double es_identity_defect(const FinslerMetric& metric, const TangentSample& s,
                          const std::optional<DensityField>& field) {
  const int n = metric.dim();
  const DensityField f = field ? *field : bh_density_field(metric);
  const double sigma = f.value(s.x);
  const Vec grad = f.gradient(s.x);
  const Mat E = berwald_curvature(metric, s).E;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      auto S = [&](std::span<const double> ab) {
        const Vec y = s.y + ab[0] * Vec::Unit(n, i) + ab[1] * Vec::Unit(n, j);
        return s_curvature_jet(metric, {s.x, y}, sigma, grad);
      };
      const std::vector<double> at = {0.0, 0.0};
      const std::vector<int> orders = i == j ? std::vector<int>{2, 0} : std::vector<int>{1, 1};
      const auto r = fd_oracle(S, at, orders);
      if (!r.ok) throw NumericalIntegrityError("es_identity_defect: oracle failed");
      worst = std::max(worst, std::abs(0.5 * r.value - E(i, j)));
    }
  return worst;
}

Mat riemann_matrix(const FinslerMetric& metric, const TangentSample& s) {
  const int n = metric.dim();
  const auto G = spray_jets(metric, s.x, s.y, 1, 2);
  Mat N(n, n);
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    g[i] = G[static_cast<std::size_t>(i)].value();
    for (int j = 0; j < n; ++j) N(i, j) = partial(G[static_cast<std::size_t>(i)], {}, {j});
  }
  Mat R = -N * N;
  for (int i = 0; i < n; ++i) {
    const Jet& Gi = G[static_cast<std::size_t>(i)];
    for (int k = 0; k < n; ++k) {
      double r = 2.0 * partial(Gi, {k}, {});
      for (int j = 0; j < n; ++j)
        r += -s.y[j] * partial(Gi, {j}, {k}) + 2.0 * g[j] * partial(Gi, {}, {j, k});
      R(i, k) += r;
    }
  }
  return R;
}

CurvatureReport riemann_curvature(const FinslerMetric& metric, const TangentSample& s) {
  const int n = metric.dim();
  CurvatureReport rep;
  rep.R = riemann_matrix(metric, s);
  const auto ft = fundamental_tensor(metric, s);
  const double F2 = std::pow(metric.eval(s.x, s.y), 2);
  rep.ricci = rep.R.trace();
  rep.ry_y = (rep.R * s.y).norm() / (F2 * s.y.norm());
  const Mat gR = ft.g * rep.R;
  rep.self_adjoint_defect = (gR - gR.transpose()).cwiseAbs().maxCoeff() /
                            std::max(1.0, gR.cwiseAbs().maxCoeff());
  // whiten with g = L L^T, then restrict to the complement of L^T y
  const Eigen::LLT<Mat> llt(ft.g);
  const Mat Lt = llt.matrixU();
  const Mat Rw = Lt * rep.R * Lt.inverse();
  const Vec yw = Lt * s.y;
  const Eigen::HouseholderQR<Mat> qr(yw);
  const Mat Q = qr.householderQ();
  const Mat Qw = Q.rightCols(n - 1);
  Mat M = Qw.transpose() * Rw * Qw;
  M = 0.5 * (M + M.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success) throw NumericalIntegrityError("riemann_curvature: eigensolve failed");
  for (int k = 0; k < n - 1; ++k) rep.principal.push_back(es.eigenvalues()[k] / F2);
  std::stable_sort(rep.principal.begin(), rep.principal.end());
  const double lo = rep.principal.front(), hi = rep.principal.back();
  if (hi - lo <= 1e-6 * std::max(1.0, std::abs(lo))) rep.flag_constant = 0.5 * (lo + hi);
  return rep;
}

double flag_curvature(const FinslerMetric& metric, const TangentSample& s, const Vec& u) {
  const Mat R = riemann_matrix(metric, s);
  const Mat g = fundamental_tensor(metric, s).g;
  const double F2 = s.y.dot(g * s.y);
  const double gyu = s.y.dot(g * u);
  const double den = F2 * u.dot(g * u) - gyu * gyu;
  if (!(den > 1e-14 * F2 * u.squaredNorm()))
    throw GeometryError("flag_curvature: u is parallel to y");
  return u.dot(g * (R * u)) / den;
}

JacobiResult jacobi_oracle(const FinslerMetric& metric, const Vec& x, const Vec& y, const Vec& v,
                           double t_end, int points) {
  if (points < 2 || !(t_end > 0.0)) throw ConfigurationError("jacobi_oracle: bad grid");
  const int n = metric.dim();
  JacobiResult res;
  for (int k = 0; k < points; ++k) res.t.push_back(t_end * k / (points - 1));
  const auto o = tight();
  const double vn = v.norm();
  if (vn == 0.0) throw ConfigurationError("jacobi_oracle: zero variation");
  const double d = 1e-3 * y.norm() / vn;
  std::vector<std::vector<PathSample>> var;
  for (double sh : {-2.0, -1.0, 1.0, 2.0})
    var.push_back(geodesic_samples(metric, x, y + sh * d * v, res.t, o));
  const auto base = geodesic_samples(metric, x, y, res.t, o);
  auto ds = [&](auto get, std::size_t k) -> Vec {
    return (get(var[0][k]) - 8.0 * get(var[1][k]) + 8.0 * get(var[2][k]) - get(var[3][k])) /
           (12.0 * d);
  };
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    const Vec J = ds([](const PathSample& p) { return p.x; }, k);
    const Vec Jd = ds([](const PathSample& p) { return p.v; }, k);
    const Vec Jdd = ds([](const PathSample& p) { return p.a; }, k);
    const auto& b = base[k];
    // N and its derivative along c from jets: N' = dN/dx c' + dN/dy c''
    const auto G = spray_jets(metric, b.x, b.v, 1, 2);
    Mat N(n, n), Nd = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Jet& Gi = G[static_cast<std::size_t>(i)];
        N(i, j) = partial(Gi, {}, {j});
        for (int m = 0; m < n; ++m)
          Nd(i, j) += partial(Gi, {m}, {j}) * b.v[m] + partial(Gi, {}, {j, m}) * b.a[m];
      }
    const Vec DDJ = Jdd + Nd * J + 2.0 * N * Jd + N * N * J;
    const Vec r = DDJ + riemann_matrix(metric, {b.x, b.v}) * J;
    if (!r.allFinite()) res.ok = false;
    res.J.push_back(J);
    res.residual.push_back(r);
    res.max_residual = std::max(res.max_residual, r.norm());
  }
  return res;
}

std::vector<double> c_basis(double kappa, double t) {
  const double w = std::sqrt(std::abs(kappa));
  if (kappa < 0) return {std::sinh(w * t), std::cosh(w * t)};
  if (kappa > 0) return {std::sin(w * t), std::cos(w * t)};
  return {t, 1.0};
}

std::vector<double> c_tilde_basis(double kappa, double t) {
  const double w = 2.0 * std::sqrt(std::abs(kappa));
  if (kappa < 0) return {std::sinh(w * t), std::cosh(w * t), 1.0};
  if (kappa > 0) return {std::sin(w * t), std::cos(w * t), 1.0};
  return {t * t, t, 1.0};
}

namespace {

// Least squares on the first `fit` points, max error over the others.
double holdout_error(const std::vector<double>& t, const std::vector<double>& values,
                     std::size_t fit, const std::function<std::vector<double>(double)>& basis) {
  const auto p = basis(0.0).size();
  Mat A(static_cast<Eigen::Index>(fit), static_cast<Eigen::Index>(p));
  Vec b(static_cast<Eigen::Index>(fit));
  for (std::size_t k = 0; k < fit; ++k) {
    const auto row = basis(t[k]);
    for (std::size_t c = 0; c < p; ++c)
      A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = row[c];
    b[static_cast<Eigen::Index>(k)] = values[k];
  }
  const Vec coef = A.colPivHouseholderQr().solve(b);
  double worst = 0.0;
  for (std::size_t k = fit; k < t.size(); ++k) {
    const auto row = basis(t[k]);
    double pred = 0.0;
    for (std::size_t c = 0; c < p; ++c) pred += coef[static_cast<Eigen::Index>(c)] * row[c];
    worst = std::max(worst, std::abs(pred - values[k]));
  }
  return worst;
}

}  // namespace

CurvatureOdeFit constant_curvature_ode_check(const FinslerMetric& metric, const Vec& x,
                                             const Vec& y, double kappa,
                                             const std::vector<double>& t_grid) {
  if (t_grid.size() < 6) throw ConfigurationError("constant_curvature_ode_check: need >= 6 grid points");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() < 0.0)
    throw ConfigurationError("constant_curvature_ode_check: grid must be ascending and >= 0");
  const int n = metric.dim();
  const TangentSample s0 = make_sample(metric, x, y);
  const Vec yu = s0.y / metric.eval(s0.x, s0.y);
  // V: g-unit, g-orthogonal to y, picked to make C(0) large
  const auto ft = fundamental_tensor(metric, {s0.x, yu});
  const Tensor C0 = cartan_torsion(metric, {s0.x, yu});
  Vec V;
  double best = -1.0;
  for (int k = 0; k < n; ++k) {
    Vec u = Vec::Unit(n, k);
    u -= yu.dot(ft.g * u) * yu;
    const double nu = std::sqrt(u.dot(ft.g * u));
    if (nu < 1e-6) continue;
    u /= nu;
    const double c = std::abs(C0.apply({u, u, u}));
    if (c > best) {
      best = c;
      V = u;
    }
  }
  CurvatureOdeFit fit;
  fit.kappa = kappa;
  fit.t = t_grid;
  const auto samples = geodesic_samples(metric, s0.x, yu, t_grid, tight(), {V});
  for (const auto& p : samples) {
    const auto cd = cartan_data(metric, {p.x, p.v});
    const Vec& Vt = p.frame[0];
    fit.C.push_back(cd.C.apply({Vt, Vt, Vt}));
    fit.C_tilde.push_back(cd.C_tilde.apply({Vt, Vt, Vt, Vt}));
    fit.scale = std::max(fit.scale, std::abs(fit.C.back()));
  }
  const std::size_t third = std::max<std::size_t>(3, t_grid.size() / 3);
  fit.c_fit_error = holdout_error(t_grid, fit.C, third, [&](double t) { return c_basis(kappa, t); });
  fit.c_tilde_fit_error =
      holdout_error(t_grid, fit.C_tilde, std::max<std::size_t>(4, third),
                    [&](double t) { return c_tilde_basis(kappa, t); });
  // L(t) = C'(t) at the first, middle and last grid points
  for (std::size_t k : {std::size_t{0}, t_grid.size() / 2, t_grid.size() - 1}) {
    const auto& p = samples[k];
    const Vec& Vt = p.frame[0];
    auto fn = [&](const PathSample& q) {
      return std::vector<double>{cartan_torsion(metric, {q.x, q.v}).apply({q.frame[0], q.frame[0], q.frame[0]})};
    };
    const double dC = along_geodesic(metric, {p.x, p.v}, 1e-2, {Vt}, fn, 1)[0];
    const double L = landsberg_from_berwald(metric, {p.x, p.v}).apply({Vt, Vt, Vt});
    fit.l_vs_dc = std::max(fit.l_vs_dc, std::abs(L - dC));
  }
  const TangentSample su{s0.x, yu};
  const Tensor r = landsberg_dot(metric, su) + cartan_torsion(metric, su) * kappa;
  fit.ldot_residual = r.max_abs();
  return fit;
}

double projective_ode_check(const FinslerMetric& F, const FinslerMetric& G, double kappa,
                            double kappa_tilde, const Vec& x, const Vec& y,
                            const std::vector<double>& t_grid) {
  const TangentSample s0 = make_sample(F, x, y);
  const Vec yu = s0.y / F.eval(s0.x, s0.y);
  const double h = 1e-2;
  std::vector<double> times;
  for (double t : t_grid)
    for (double o : {-2 * h, -h, -h / 2, 0.0, h / 2, h, 2 * h}) times.push_back(t + o);
  const auto samples = geodesic_samples(F, s0.x, yu, times, tight());
  std::map<double, double> phi;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double g = G.eval(samples[k].x, samples[k].v);
    if (!(g > 1e-12)) throw NumericalIntegrityError("projective_ode_check: G(c') vanishes");
    phi[times[k]] = 1.0 / std::sqrt(g);
  }
  double worst = 0.0;
  for (double t : t_grid) {
    const double p = phi.at(t);
    const double pdd = five_point([&](double o) { return std::vector<double>{phi.at(t + o)}; }, h, 2)[0];
    worst = std::max(worst, std::abs(pdd + kappa * p - kappa_tilde / (p * p * p)));
  }
  return worst;
}

}  // namespace finsler
