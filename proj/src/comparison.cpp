#include "finsler/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/spray.hpp"

namespace finsler {

double s_lambda(double lambda, double t) {
  if (lambda > 0.0) {
    const double w = std::sqrt(lambda);
    return std::sin(w * t) / w;
  }
  if (lambda < 0.0) {
    const double w = std::sqrt(-lambda);
    return std::sinh(w * t) / w;
  }
  return t;
}

double ModelVolume::max_radius() const {
  return lambda > 0.0 ? std::numbers::pi / std::sqrt(lambda)
                      : std::numeric_limits<double>::infinity();
}

double ModelVolume::derivative(double r) const {
  if (r < 0.0 || r > max_radius() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "model volume radius " << r << " outside [0, " << max_radius() << "]";
    throw RangeError(os.str());
  }
  return unit_sphere_area(n) * std::pow(std::exp(-delta * r) * s_lambda(lambda, r), n - 1);
}

double ModelVolume::value(double r) const {
  derivative(r);  // range check
  if (n < 2) throw ConfigurationError("model volume needs n >= 2");
  if (r == 0.0) return 0.0;
  auto f = [this](double t) {
    return std::pow(std::exp(-delta * t) * s_lambda(lambda, t), n - 1);
  };
  return unit_sphere_area(n) * integrate(f, 0.0, std::min(r, max_radius()), 1e-14);
}

double model_volume(double lambda, double delta, int n, double r) {
  return ModelVolume{lambda, delta, n}.value(r);
}

CurvatureBoundSweep curvature_bound_sweep(const FinslerMetric& metric, double lambda,
                                          double delta, int samples, bool check_s, double tol) {
  const int n = metric.dim();
  CurvatureBoundSweep sw;
  sw.min_ricci = std::numeric_limits<double>::infinity();
  sw.min_s = std::numeric_limits<double>::infinity();
  const double ric_bound = (n - 1) * lambda;
  const double s_bound = (n - 1) * delta;
  const DensityField field = bh_density_field(metric);
  for (const TangentSample& s : halton_samples(metric, samples)) {
    ++sw.samples;
    const double F = metric.eval(s.x, s.y);
    const double ric = riemann_curvature(metric, s).ricci / (F * F);
    sw.min_ricci = std::min(sw.min_ricci, ric);
    if (ric < ric_bound - tol * std::max(1.0, std::abs(ric_bound)) && sw.ok) {
      std::ostringstream os;
      os << "Ric/F^2 = " << ric << " below (n-1) lambda = " << ric_bound << " at x = ("
         << s.x.transpose() << ")";
      sw.ok = false;
      sw.failure = os.str();
    }
    if (!check_s) continue;
    const double S = s_curvature_jet(metric, s, field.value(s.x), field.gradient(s.x)) / F;
    sw.min_s = std::min(sw.min_s, S);
    if (S < s_bound - tol * std::max(1.0, std::abs(s_bound)) && sw.ok) {
      std::ostringstream os;
      os << "S/F = " << S << " below (n-1) delta = " << s_bound << " at x = ("
         << s.x.transpose() << ")";
      sw.ok = false;
      sw.failure = os.str();
    }
  }
  return sw;
}

RatioReport ratio_monotonicity_check(const FinslerMetric& metric, const Vec& x, double lambda,
                                     double delta, const std::vector<double>& r_grid,
                                     const RatioOptions& opts) {
  RatioReport rep;
  rep.sweep = curvature_bound_sweep(metric, lambda, delta, opts.sweep_samples);
  if (!rep.sweep.ok) {
    rep.skipped = true;
    rep.note = "curvature bounds not satisfied, check skipped: " + rep.sweep.failure;
    return rep;
  }
  if (r_grid.empty()) throw ConfigurationError("empty radius grid");
  std::vector<double> radii = r_grid;
  std::sort(radii.begin(), radii.end());
  const ModelVolume model{lambda, delta, metric.dim()};
  for (double r : radii) {
    RatioRow row;
    row.r = r;
    row.model = model.value(r);
    const MeasureEstimate v = ball_volume(metric, {x, r, opts.source, opts.domain}, opts.volume);
    row.volume = v.value;
    row.volume_err = v.stderr_;
    row.flagged = v.flagged;
    row.ratio = v.value / row.model;
    rep.rows.push_back(row);
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    const double ea = a.volume_err / a.model, eb = b.volume_err / b.model;
    const double tol = 3.0 * std::hypot(ea, eb) + 1e-9;
    const double inc = b.ratio - a.ratio - tol;
    if (inc > 0.0) {
      rep.non_increasing = false;
      rep.max_increase = std::max(rep.max_increase, inc);
    }
  }
  return rep;
}

namespace {

// g_y-orthonormal basis of the g_y-complement of y
std::vector<Vec> orthonormal_complement(const Mat& g, const Vec& y) {
  const int n = static_cast<int>(y.size());
  std::vector<Vec> basis{y / std::sqrt(y.dot(g * y))};
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n; ++i) {
    Vec v = Vec::Unit(n, i);
    for (const Vec& b : basis) v -= v.dot(g * b) * b;
    const double len = std::sqrt(v.dot(g * v));
    if (len > 1e-8) basis.push_back(v / len);
  }
  return {basis.begin() + 1, basis.end()};
}

}  // namespace

ConjugatePoint conjugate_point_bound(const FinslerMetric& metric, const Vec& x, const Vec& y_in,
                                     double lambda, int sweep_samples) {
  if (!(lambda > 0.0))
    throw PreconditionError("conjugate point bound needs a Ricci bound lambda > 0");
  ConjugatePoint out;
  out.sweep = curvature_bound_sweep(metric, lambda, 0.0, sweep_samples, false);
  if (!out.sweep.ok)
    throw PreconditionError("Ricci lower bound not satisfied: " + out.sweep.failure);
  out.bound = std::numbers::pi / std::sqrt(lambda);

  make_sample(metric, x, y_in);  // chart and F > 0 checks
  const Vec y = y_in / metric.eval(x, y_in);
  const int n = metric.dim();
  const int m = n - 1;
  const std::vector<Vec> frame =
      orthonormal_complement(fundamental_tensor(metric, {x, y}).g, y);

  GeodesicOptions go;
  go.rtol = go.atol = 1e-12;
  go.max_step = 0.05;
  double T = 1.5 * out.bound + 0.1;
  const GeodesicPath probe = integrate_geodesic(metric, x, y, T, go);
  const double h = 1e-2;
  if (probe.exited) T = probe.t_end - 2.0 * h;
  const int steps = static_cast<int>(std::floor(T / h));
  if (steps < 2) {
    out.inconclusive = true;
    out.note = "geodesic leaves the chart immediately";
    return out;
  }
  std::vector<double> times;
  for (int k = 0; k <= 2 * steps; ++k) times.push_back(0.5 * h * k);
  const auto path = geodesic_samples(metric, x, y, times, go, frame);

  // K(t) at every half step
  std::vector<Mat> K;
  K.reserve(path.size());
  for (const PathSample& p : path) {
    const TangentSample s{p.x, p.v};
    const Mat R = riemann_matrix(metric, s);
    const Mat g = fundamental_tensor(metric, s).g;
    Mat k(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) k(a, b) = p.frame[b].dot(g * (R * p.frame[a]));
    K.push_back(0.5 * (k + k.transpose()));
  }

  // RK4 on (J, J'), matrix valued
  std::vector<Mat> Js{Mat::Zero(m, m)}, Ds{Mat::Identity(m, m)};
  for (int k = 0; k < steps; ++k) {
    const Mat& J = Js.back();
    const Mat& D = Ds.back();
    const Mat& K0 = K[2 * k];
    const Mat& K1 = K[2 * k + 1];
    const Mat& K2 = K[2 * k + 2];
    const Mat j1 = D, d1 = -K0 * J;
    const Mat j2 = D + 0.5 * h * d1, d2 = -K1 * (J + 0.5 * h * j1);
    const Mat j3 = D + 0.5 * h * d2, d3 = -K1 * (J + 0.5 * h * j2);
    const Mat j4 = D + h * d3, d4 = -K2 * (J + h * j3);
    Mat Jn = J + h / 6.0 * (j1 + 2 * j2 + 2 * j3 + j4);
    Mat Dn = D + h / 6.0 * (d1 + 2 * d2 + 2 * d3 + d4);
    Js.push_back(std::move(Jn));
    Ds.push_back(std::move(Dn));
  }

  // J is singular where its smallest singular value vanishes; det J can touch
  // zero without changing sign (n = 3 sphere), so look for local minima of
  // sigma_min and refine them on the cubic Hermite interpolant.
  auto smin = [](const Mat& a) { return Eigen::JacobiSVD<Mat>(a).singularValues().minCoeff(); };
  auto interp = [&](double t) {
    const int k = std::clamp(static_cast<int>(std::floor(t / h)), 0, steps - 1);
    const double s = t / h - k;
    const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
    return Mat(h00 * Js[k] + h10 * h * Ds[k] + h01 * Js[k + 1] + h11 * h * Ds[k + 1]);
  };
  std::vector<double> sv;
  for (const Mat& J : Js) sv.push_back(smin(J));
  for (int k = 2; k < steps; ++k) {
    if (!(sv[k] < sv[k - 1] && sv[k] <= sv[k + 1])) continue;
    // golden section on [t_{k-1}, t_{k+1}]
    double lo = h * (k - 1), hi = h * (k + 1);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = smin(interp(c)), fd = smin(interp(d));
    for (int it = 0; it < 80; ++it) {
      if (fc < fd) {
        hi = d; d = c; fd = fc;
        c = hi - g * (hi - lo); fc = smin(interp(c));
      } else {
        lo = c; c = d; fc = fd;
        d = lo + g * (hi - lo); fd = smin(interp(d));
      }
    }
    const double t = 0.5 * (lo + hi);
    if (smin(interp(t)) > 1e-6 * std::max(1.0, Js[k].norm())) continue;
    out.found = true;
    out.t = t;
    out.within_bound = out.t <= out.bound + 1e-3;
    if (!out.within_bound) out.note = "conjugate point beyond pi / sqrt(lambda)";
    return out;
  }
  out.inconclusive = true;
  out.note = probe.exited ? "geodesic left the chart before a conjugate point"
                          : "no conjugate point within 1.5 pi / sqrt(lambda)";
  return out;
}

}  // namespace finsler
