#include "finsler/spray.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "finsler/fd.hpp"
#include "finsler/minkowski.hpp"

namespace finsler {

std::vector<Jet> jet_solve(std::vector<std::vector<Jet>> A, std::vector<Jet> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c].value()) > std::abs(A[piv][c].value())) piv = r;
    if (A[piv][c].value() == 0.0) throw MetricValidityError("singular fundamental tensor");
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    const Jet inv = 1.0 / A[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const Jet m = A[r][c] * inv;
      for (std::size_t k = c + 1; k < n; ++k) A[r][k] -= m * A[c][k];
      b[r] -= m * b[c];
    }
  }
  std::vector<Jet> z(n);
  for (std::size_t r = n; r-- > 0;) {
    Jet acc = b[r];
    for (std::size_t k = r + 1; k < n; ++k) acc -= A[r][k] * z[k];
    z[r] = acc / A[r][r];
  }
  return z;
}

std::vector<Jet> spray_jets(const Jet& f2, std::span<const Jet> y_vars) {
  const int n = f2.spec().n;
  if (f2.spec().max_x_order < 1 || f2.spec().max_y_order < 2)
    throw ConfigurationError("spray coefficients need F^2 to order (1, 2) at least");
  std::vector<Jet> dy(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) dy[static_cast<std::size_t>(i)] = f2.d_y(i);
  std::vector<std::vector<Jet>> g(static_cast<std::size_t>(n), std::vector<Jet>(static_cast<std::size_t>(n)));
  std::vector<Jet> rhs(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    const auto L = static_cast<std::size_t>(l);
    for (int i = 0; i < n; ++i) g[L][static_cast<std::size_t>(i)] = 0.5 * dy[L].d_y(i);
    Jet r = -f2.d_x(l);
    for (int k = 0; k < n; ++k) r += dy[L].d_x(k) * y_vars[static_cast<std::size_t>(k)];
    rhs[L] = r;
  }
  auto G = jet_solve(std::move(g), std::move(rhs));
  for (auto& gi : G) gi *= 0.25;
  return G;
}

std::vector<Jet> spray_jets(const FinslerMetric& metric, const Vec& x, const Vec& y,
                            int x_order, int y_order) {
  const int n = metric.dim();
  auto vars = lift(as_span(x), as_span(y), {n, x_order + 1, y_order + 2});
  std::span<const Jet> all(vars);
  const Jet f = metric.eval(all.subspan(0, static_cast<std::size_t>(n)),
                            all.subspan(static_cast<std::size_t>(n)));
  return spray_jets(f * f, all.subspan(static_cast<std::size_t>(n)));
}

SprayCoeffs spray_coeffs(const FinslerMetric& metric, const TangentSample& s) {
  const int n = metric.dim();
  const auto G = spray_jets(metric, s.x, s.y, 0, 1);
  SprayCoeffs out;
  out.G.resize(n);
  out.N.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.G[i] = G[static_cast<std::size_t>(i)].value();
    for (int j = 0; j < n; ++j) out.N(i, j) = partial(G[static_cast<std::size_t>(i)], {}, {j});
  }
  return out;
}

Vec spray_G(const FinslerMetric& metric, const Vec& x, const Vec& y) {
  const auto G = spray_jets(metric, x, y, 0, 0);
  Vec out(metric.dim());
  for (int i = 0; i < metric.dim(); ++i) out[i] = G[static_cast<std::size_t>(i)].value();
  return out;
}

namespace {

struct OutOfChart {};

// State layout: x, v, U_1, ..., U_m.
struct Flow {
  const FinslerMetric& metric;
  int n;
  int m;

  Vec rhs(const Vec& z) const {
    const Vec x = z.head(n), v = z.segment(n, n);
    if (!metric.in_domain(x) || !z.allFinite()) throw OutOfChart{};
    Vec out(z.size());
    out.head(n) = v;
    if (m == 0) {
      out.segment(n, n) = -2.0 * spray_G(metric, x, v);
      return out;
    }
    const auto sc = spray_coeffs(metric, {x, v});
    out.segment(n, n) = -2.0 * sc.G;
    for (int k = 0; k < m; ++k)
      out.segment(2 * n + k * n, n) = -sc.N * z.segment(2 * n + k * n, n);
    return out;
  }
};

PathSample make_sample(double t, const Vec& z, const Vec& dz, int n, int m) {
  PathSample s;
  s.t = t;
  s.x = z.head(n);
  s.v = z.segment(n, n);
  s.a = dz.segment(n, n);
  for (int k = 0; k < m; ++k) {
    s.frame.push_back(z.segment(2 * n + k * n, n));
    s.frame_rate.push_back(dz.segment(2 * n + k * n, n));
  }
  return s;
}

struct Hermite {
  double h00, h10, h01, h11;     // value weights
  double d00, d10, d01, d11;     // derivative weights (per unit s)
  explicit Hermite(double s) {
    const double s2 = s * s, s3 = s2 * s;
    h00 = 2 * s3 - 3 * s2 + 1;
    h10 = s3 - 2 * s2 + s;
    h01 = -2 * s3 + 3 * s2;
    h11 = s3 - s2;
    d00 = 6 * s2 - 6 * s;
    d10 = 3 * s2 - 4 * s + 1;
    d01 = -6 * s2 + 6 * s;
    d11 = 3 * s2 - 2 * s;
  }
  Vec value(const Vec& p0, const Vec& m0, const Vec& p1, const Vec& m1, double h) const {
    return h00 * p0 + h10 * h * m0 + h01 * p1 + h11 * h * m1;
  }
  Vec slope(const Vec& p0, const Vec& m0, const Vec& p1, const Vec& m1, double h) const {
    return (d00 * p0 + d10 * h * m0 + d01 * p1 + d11 * h * m1) / h;
  }
};

}  // namespace

PathSample GeodesicPath::at(double t) const {
  if (samples.empty()) throw RangeError("empty geodesic path");
  const double lo = std::min(samples.front().t, samples.back().t);
  const double hi = std::max(samples.front().t, samples.back().t);
  if (t < lo - 1e-12 || t > hi + 1e-12) {
    std::ostringstream os;
    os << "t = " << t << " outside the integrated range [" << lo << ", " << hi << "]";
    throw RangeError(os.str());
  }
  // samples are monotone in t (decreasing when reversed)
  std::size_t k = 0;
  if (!reversed) {
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const PathSample& s) { return v < s.t; });
    k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - samples.begin()) - 1));
  } else {
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const PathSample& s) { return v > s.t; });
    k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - samples.begin()) - 1));
  }
  if (k + 1 >= samples.size()) k = samples.size() >= 2 ? samples.size() - 2 : 0;
  if (samples.size() == 1) return samples.front();
  const auto& a = samples[k];
  const auto& b = samples[k + 1];
  const double h = b.t - a.t;
  const Hermite H((t - a.t) / h);
  PathSample s;
  s.t = t;
  s.x = H.value(a.x, a.v, b.x, b.v, h);
  s.v = H.value(a.v, a.a, b.v, b.a, h);
  s.a = H.slope(a.v, a.a, b.v, b.a, h);
  for (std::size_t f = 0; f < a.frame.size(); ++f) {
    s.frame.push_back(H.value(a.frame[f], a.frame_rate[f], b.frame[f], b.frame_rate[f], h));
    s.frame_rate.push_back(H.slope(a.frame[f], a.frame_rate[f], b.frame[f], b.frame_rate[f], h));
  }
  return s;
}

GeodesicPath integrate_geodesic(const FinslerMetric& metric, const Vec& x0, const Vec& y0,
                                double t_end, const GeodesicOptions& opts,
                                const std::vector<Vec>& frame) {
  const int n = metric.dim();
  const int m = static_cast<int>(frame.size());
  TangentSample start = make_sample(metric, x0, y0);
  if (t_end == 0.0) throw ConfigurationError("integrate_geodesic: t_end must be nonzero");
  Vec y = start.y;
  if (opts.unit_speed) y /= metric.eval(start.x, y);

  Flow flow{metric, n, m};
  Vec z(2 * n + m * n);
  z.head(n) = start.x;
  z.segment(n, n) = y;
  for (int k = 0; k < m; ++k) {
    if (frame[static_cast<std::size_t>(k)].size() != n)
      throw ConfigurationError("frame vector dimension mismatch");
    z.segment(2 * n + k * n, n) = frame[static_cast<std::size_t>(k)];
  }

  GeodesicPath path;
  path.unit_speed = opts.unit_speed;
  path.reversed = t_end < 0.0;
  const double dir = path.reversed ? -1.0 : 1.0;
  double t = 0.0;
  Vec k1 = flow.rhs(z);
  path.samples.push_back(make_sample(t, z, k1, n, m));

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;

  std::vector<double> stops;
  for (double st : opts.stops)
    if (dir * st >= 0.0 && dir * (st - t_end) <= 0.0) stops.push_back(st);
    else throw ConfigurationError("integrate_geodesic: stop outside [0, t_end]");
  std::sort(stops.begin(), stops.end(), [dir](double a, double b) { return dir * a < dir * b; });
  std::size_t next_stop = 0;
  auto record_stops = [&](double tn) {
    while (next_stop < stops.size() && stops[next_stop] == tn) {
      path.stop_samples.push_back(path.samples.size() - 1);
      ++next_stop;
    }
  };
  record_stops(0.0);

  double h = dir * std::min(opts.initial_step, std::abs(t_end));
  double err_old = 1e-4;
  const double span = std::abs(t_end);
  while (dir * (t_end - t) > 1e-14 * std::max(1.0, span)) {
    if (path.accepted + path.rejected > opts.max_steps)
      throw IntegrationError("integrate_geodesic: step budget exhausted at t = " +
                             std::to_string(t));
    const double h_free = h;
    // land exactly on t_end and on the stops
    double target = std::numeric_limits<double>::quiet_NaN();
    // (a step stopping just short of a landing point is stretched onto it)
    const double slack = 0.01 * std::abs(h);
    if (dir * (t + h - t_end) >= -slack) target = t_end;
    bool at_stop = false;
    if (next_stop < stops.size() && dir * (t + h - stops[next_stop]) >= -slack) {
      target = stops[next_stop];
      at_stop = true;
    }
    if (!std::isnan(target)) h = target - t;
    Vec znew, k7;
    double err = 0.0;
    bool outside = false;
    try {
      const Vec k2 = flow.rhs(z + h * (a21 * k1));
      const Vec k3 = flow.rhs(z + h * (a31 * k1 + a32 * k2));
      const Vec k4 = flow.rhs(z + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vec k5 = flow.rhs(z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vec k6 = flow.rhs(z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      znew = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = flow.rhs(znew);
      const Vec e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double acc = 0.0;
      for (int i = 0; i < z.size(); ++i) {
        const double sc = opts.atol + opts.rtol * std::max(std::abs(z[i]), std::abs(znew[i]));
        acc += (e[i] / sc) * (e[i] / sc);
      }
      err = std::sqrt(acc / static_cast<double>(z.size()));
    } catch (const OutOfChart&) {
      outside = true;
    } catch (const DomainError&) {
      outside = true;
    }
    if (outside) {
      ++path.rejected;
      h *= 0.25;
      if (std::abs(h) < 1e-10 * std::max(1.0, std::abs(t))) {
        path.exited = true;
        break;
      }
      continue;
    }
    if (!std::isfinite(err)) throw IntegrationError("integrate_geodesic: non-finite error");
    if (err <= 1.0) {
      const double tn = std::isnan(target) ? t + h : target;
      const PathSample prev = path.samples.back();
      path.samples.push_back(make_sample(tn, znew, k7, n, m));
      // Euler-Lagrange residual at interior points of the dense output
      for (int c = 1; c <= opts.residual_checkpoints; ++c) {
        const double tc = t + h * c / (opts.residual_checkpoints + 1.0);
        const Hermite H((tc - t) / h);
        const auto& b = path.samples.back();
        const Vec xc = H.value(prev.x, prev.v, b.x, b.v, h);
        const Vec vc = H.value(prev.v, prev.a, b.v, b.a, h);
        const Vec ac = H.slope(prev.v, prev.a, b.v, b.a, h);
        try {
          const double r = (ac + 2.0 * spray_G(metric, xc, vc)).norm();
          path.max_el_residual = std::max(path.max_el_residual, r);
        } catch (const Error&) {
        }
      }
      record_stops(tn);
      t = tn;
      z = znew;
      k1 = k7;
      ++path.accepted;
      const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) * std::pow(err_old, 0.04);
      if (at_stop && std::abs(h_free) > std::abs(h)) h = h_free;
      else h *= std::clamp(fac, 0.2, 5.0);
      if (std::abs(h) > opts.max_step) h = dir * opts.max_step;
      err_old = std::max(err, 1e-4);
    } else {
      ++path.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "integrate_geodesic: step size collapsed at t = " << t << ", x = ("
           << z.head(n).transpose() << ")";
        throw IntegrationError(os.str());
      }
    }
  }
  path.t_end = t;
  return path;
}

std::vector<PathSample> geodesic_samples(const FinslerMetric& metric, const Vec& x, const Vec& y,
                                         const std::vector<double>& times,
                                         const GeodesicOptions& opts,
                                         const std::vector<Vec>& frame) {
  std::vector<PathSample> out(times.size());
  for (double sign : {1.0, -1.0}) {
    GeodesicOptions o = opts;
    o.unit_speed = false;
    o.stops.clear();
    std::vector<std::size_t> which;
    double reach = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k)
      if (sign * times[k] > 0.0 || (sign > 0 && times[k] == 0.0)) {
        which.push_back(k);
        o.stops.push_back(times[k]);
        reach = std::max(reach, sign * times[k]);
      }
    if (which.empty()) continue;
    std::sort(which.begin(), which.end(),
              [&](std::size_t a, std::size_t b) { return sign * times[a] < sign * times[b]; });
    const auto path = integrate_geodesic(metric, x, y, reach > 0.0 ? sign * reach : sign * 1e-300, o, frame);
    if (path.stop_samples.size() != which.size()) {
      std::ostringstream os;
      os << "geodesic_samples: chart exit at t = " << path.t_end << " before all requested times";
      throw RangeError(os.str());
    }
    for (std::size_t k = 0; k < which.size(); ++k) out[which[k]] = path.samples[path.stop_samples[k]];
  }
  return out;
}

Vec exp_map(const FinslerMetric& metric, const Vec& x, const Vec& y,
            const GeodesicOptions& opts) {
  if (y.norm() == 0.0) return x;
  GeodesicOptions o = opts;
  o.unit_speed = false;
  const auto path = integrate_geodesic(metric, x, y, 1.0, o);
  if (path.exited) {
    std::ostringstream os;
    os << "exp_map: geodesic leaves the chart at t = " << path.t_end;
    throw RangeError(os.str());
  }
  return path.samples.back().x;
}

Vec covariant_derivative(const FinslerMetric& metric, const std::function<Vec(const Vec&)>& U,
                         const Vec& x, const Vec& y) {
  const int n = metric.dim();
  const Vec u0 = U(x);
  Vec dU(n);
  for (int i = 0; i < n; ++i) {
    auto comp = [&](std::span<const double> s) { return U(x + s[0] * y)[i]; };
    const std::vector<double> at = {0.0};
    const std::vector<int> order = {1};
    const auto r = fd_oracle(comp, at, order);
    if (!r.ok) throw NumericalIntegrityError("covariant_derivative: oracle failed");
    dU[i] = r.value;
  }
  return dU + spray_coeffs(metric, make_sample(metric, x, y)).N * u0;
}

Mat frame_gram(const FinslerMetric& metric, const PathSample& s) {
  const Mat g = fundamental_tensor(metric, {s.x, s.v}).g;
  const int m = static_cast<int>(s.frame.size());
  Mat G(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      G(a, b) = s.frame[static_cast<std::size_t>(a)].dot(g * s.frame[static_cast<std::size_t>(b)]);
  return G;
}

TransportResult parallel_transport(const FinslerMetric& metric, const Vec& x, const Vec& y,
                                   double t_end, const std::vector<Vec>& frame,
                                   const GeodesicOptions& opts) {
  if (frame.empty()) throw ConfigurationError("parallel_transport: empty frame");
  TransportResult r;
  r.frame_in = frame;
  r.path = integrate_geodesic(metric, x, y, t_end, opts, frame);
  const Mat G0 = frame_gram(metric, r.path.samples.front());
  for (const auto& s : r.path.samples) {
    for (const auto& u : s.frame)
      if (!u.allFinite()) throw IntegrationError("parallel_transport: frame degenerated");
    r.gram_drift = std::max(r.gram_drift, (frame_gram(metric, s) - G0).cwiseAbs().maxCoeff());
  }
  r.frame_out = r.path.samples.back().frame;
  return r;
}

TransportResult parallel_transport(const FinslerMetric& metric, const Curve& curve, double t0,
                                   double t1, const std::vector<Vec>& frame, int steps) {
  if (frame.empty() || steps < 1) throw ConfigurationError("parallel_transport: bad arguments");
  const int n = metric.dim();
  const int m = static_cast<int>(frame.size());
  auto rate = [&](double t, const Vec& U) {
    const auto [x, v] = curve(t);
    const Mat N = spray_coeffs(metric, make_sample(metric, x, v)).N;
    Vec out(U.size());
    for (int k = 0; k < m; ++k) out.segment(k * n, n) = -N * U.segment(k * n, n);
    return out;
  };
  Vec U(m * n);
  for (int k = 0; k < m; ++k) U.segment(k * n, n) = frame[static_cast<std::size_t>(k)];
  auto sample_at = [&](double t, const Vec& state) {
    const auto [x, v] = curve(t);
    PathSample s;
    s.t = t;
    s.x = x;
    s.v = v;
    for (int k = 0; k < m; ++k) s.frame.push_back(state.segment(k * n, n));
    return s;
  };
  TransportResult r;
  r.frame_in = frame;
  const double h = (t1 - t0) / steps;
  const Mat G0 = frame_gram(metric, sample_at(t0, U));
  r.path.samples.push_back(sample_at(t0, U));
  double t = t0;
  for (int k = 0; k < steps; ++k) {
    const Vec a = rate(t, U);
    const Vec b = rate(t + 0.5 * h, U + 0.5 * h * a);
    const Vec c = rate(t + 0.5 * h, U + 0.5 * h * b);
    const Vec d = rate(t + h, U + h * c);
    U += h / 6.0 * (a + 2 * b + 2 * c + d);
    t = t0 + (k + 1) * h;
    r.path.samples.push_back(sample_at(t, U));
    r.gram_drift = std::max(r.gram_drift,
                            (frame_gram(metric, r.path.samples.back()) - G0).cwiseAbs().maxCoeff());
  }
  r.path.t_end = t1;
  r.frame_out = r.path.samples.back().frame;
  return r;
}

std::string path_csv(const FinslerMetric& metric, const GeodesicPath& path, double dt) {
  const int n = metric.dim();
  std::ostringstream os;
  os.precision(17);
  os << "# finsler-path v1 metric=" << metric.describe() << " exited=" << path.exited << "\n";
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i + 1;
  for (int i = 0; i < n; ++i) os << ",v" << i + 1;
  os << ",F\n";
  auto row = [&](const PathSample& s) {
    os << s.t;
    for (int i = 0; i < n; ++i) os << "," << s.x[i];
    for (int i = 0; i < n; ++i) os << "," << s.v[i];
    os << "," << metric.eval(s.x, s.v) << "\n";
  };
  if (dt <= 0.0) {
    for (const auto& s : path.samples) row(s);
  } else {
    const double t0 = path.samples.front().t, t1 = path.t_end;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const int count = static_cast<int>(std::floor(std::abs(t1 - t0) / dt + 1e-9));
    for (int k = 0; k <= count; ++k) row(path.at(t0 + dir * k * dt));
    if (std::abs(t0 + dir * count * dt - t1) > 1e-9) row(path.at(t1));
  }
  return os.str();
}

}  // namespace finsler
