#include "finsler/minkowski.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "finsler/fd.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::quadrature: return "quadrature";
    case EstimateMethod::monte_carlo: return "monte_carlo";
    case EstimateMethod::closed_form: return "closed_form";
  }
  return "?";
}

FundamentalTensor fundamental_tensor(const Jet& f2, int n) {
  FundamentalTensor ft;
  ft.g.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) ft.g(i, j) = ft.g(j, i) = 0.5 * partial(f2, {}, {i, j});
  Eigen::LLT<Mat> llt(ft.g);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "fundamental tensor is not positive definite:\n" << ft.g;
    throw MetricValidityError(os.str());
  }
  ft.g_inv = llt.solve(Mat::Identity(n, n));
  const auto& L = llt.matrixL();
  double d = 1.0;
  for (int i = 0; i < n; ++i) d *= L(i, i);
  ft.det_g = d * d;
  return ft;
}

FundamentalTensor fundamental_tensor(const FinslerMetric& metric, const TangentSample& s) {
  try {
    return fundamental_tensor(metric.squared_jet(s.x, s.y, 0, 2), metric.dim());
  } catch (const MetricValidityError& e) {
    std::ostringstream os;
    os << metric.describe() << " at x = (" << s.x.transpose() << "), y = (" << s.y.transpose()
       << "): " << e.what();
    throw MetricValidityError(os.str());
  }
}

namespace {

Tensor y_tensor(const Jet& f2, int n, int rank, double scale) {
  Tensor t(n, rank);
  for (std::size_t f = 0; f < t.data().size(); ++f) {
    const auto idx = unflatten(f, n, rank);
    t.data()[f] = scale * f2.partial({}, index_of(idx));
  }
  return t;
}

}  // namespace

Tensor cartan_torsion(const FinslerMetric& metric, const TangentSample& s) {
  return y_tensor(metric.squared_jet(s.x, s.y, 0, 3), metric.dim(), 3, 0.25);
}

Tensor cartan_tilde(const FinslerMetric& metric, const TangentSample& s) {
  return y_tensor(metric.squared_jet(s.x, s.y, 0, 4), metric.dim(), 4, 0.25);
}

Vec mean_cartan(const FundamentalTensor& g, const Tensor& C) {
  const int n = C.dim();
  Vec I = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) I[k] += g.g_inv(i, j) * C(i, j, k);
  return I;
}

CartanData cartan_data(const FinslerMetric& metric, const TangentSample& s,
                       std::optional<double> density) {
  const int n = metric.dim();
  const Jet f2 = metric.squared_jet(s.x, s.y, 0, 4);
  const auto g = fundamental_tensor(f2, n);
  CartanData d;
  d.C = y_tensor(f2, n, 3, 0.25);
  d.C_tilde = y_tensor(f2, n, 4, 0.25);
  d.I = mean_cartan(g, d.C);
  if (density) {
    if (!(*density > 0.0)) throw ConfigurationError("distortion needs a positive density");
    d.tau = std::log(std::sqrt(g.det_g) / *density);
  }
  return d;
}

double distortion(const FinslerMetric& metric, const TangentSample& s, double sigma) {
  if (!(sigma > 0.0)) throw ConfigurationError("distortion needs a positive density");
  return std::log(std::sqrt(fundamental_tensor(metric, s).det_g) / sigma);
}

double distortion_derivative_check(const FinslerMetric& metric, const TangentSample& s,
                                   double sigma) {
  const int n = metric.dim();
  const auto d = cartan_data(metric, s, sigma);
  auto tau = [&](std::span<const double> y) {
    Vec yy = Eigen::Map<const Vec>(y.data(), n);
    return distortion(metric, {s.x, yy}, sigma);
  };
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> orders(static_cast<std::size_t>(n), 0);
    orders[static_cast<std::size_t>(i)] = 1;
    const auto r = fd_oracle(tau, as_span(s.y), orders);
    if (!r.ok) throw NumericalIntegrityError("distortion derivative: oracle failed");
    worst = std::max(worst, std::abs(r.value - d.I[i]));
  }
  return worst;
}

namespace {

void require_quadrature_dim(int n) {
  if (n != 2 && n != 3)
    throw ConfigurationError("spherical quadrature is implemented for n = 2 and 3 only");
}

double body_volume(const FinslerMetric& metric, const Vec& x, const SphereRule& rule) {
  const int n = metric.dim();
  double vol = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    vol += rule.weights[k] * std::pow(metric.eval(x, rule.nodes[k]), -n) / n;
  return vol;
}

}  // namespace

double bh_density(const FinslerMetric& metric, const Vec& x) {
  require_quadrature_dim(metric.dim());
  if (!metric.in_domain(x)) throw DomainError("bh_density: base point outside the chart");
  return unit_ball_volume(metric.dim()) / body_volume(metric, x, sphere_rule(metric.dim()));
}

MeasureEstimate bh_density_quadrature(const FinslerMetric& metric, const Vec& x) {
  require_quadrature_dim(metric.dim());
  const int n = metric.dim();
  const double fine = bh_density(metric, x);
  const double coarse =
      unit_ball_volume(n) / body_volume(metric, x, sphere_rule(n, 360));
  MeasureEstimate e;
  e.value = fine;
  e.stderr_ = n == 2 ? std::abs(fine - coarse) : 0.0;
  e.n_samples = static_cast<long long>(sphere_rule(n).nodes.size());
  e.method = EstimateMethod::quadrature;
  return e;
}

MeasureEstimate bh_density_mc(const FinslerMetric& metric, const Vec& x, long long samples,
                              std::uint64_t seed) {
  require_quadrature_dim(metric.dim());
  if (samples < 1) throw ConfigurationError("bh_density_mc: need at least one sample");
  const int n = metric.dim();
  const auto& rule = sphere_rule(n);
  double reach = 0.0;
  for (const auto& node : rule.nodes) reach = std::max(reach, 1.0 / metric.eval(x, node));
  const double R = 1.1 * reach;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-R, R);
  Vec y(n);
  long long hits = 0;
  for (long long k = 0; k < samples; ++k) {
    for (int i = 0; i < n; ++i) y[i] = u(rng);
    if (y.squaredNorm() > 0.0 && metric.eval(x, y) < 1.0) ++hits;
  }
  MeasureEstimate e;
  e.n_samples = samples;
  e.seed = seed;
  e.method = EstimateMethod::monte_carlo;
  if (hits == 0) {
    e.flagged = true;
    e.note = "no sample inside the unit body";
    return e;
  }
  const double box = std::pow(2.0 * R, n);
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  const double vol = box * p;
  const double vol_se = box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  e.value = unit_ball_volume(n) / vol;
  e.stderr_ = e.value * vol_se / vol;
  return e;
}

double bh_density_checked(const FinslerMetric& metric, const Vec& x, long long samples,
                          std::uint64_t seed) {
  const auto q = bh_density_quadrature(metric, x);
  const auto mc = bh_density_mc(metric, x, samples, seed);
  const double sigma = std::hypot(q.stderr_, mc.stderr_);
  if (mc.flagged || std::abs(q.value - mc.value) > 3.0 * sigma) {
    std::ostringstream os;
    os << "bh_density of " << metric.describe() << ": quadrature " << q.value
       << " vs Monte Carlo " << mc.value << " +- " << mc.stderr_;
    throw NumericalIntegrityError(os.str());
  }
  return q.value;
}

Jet density_jet(const FinslerMetric& metric, const Vec& x, int x_order) {
  const int n = metric.dim();
  const Vec zero = Vec::Zero(n);
  auto xs = lift(as_span(x), as_span(zero), {n, x_order, 0});
  std::span<const Jet> xj(xs.data(), static_cast<std::size_t>(n));
  if (auto closed = metric.closed_bh_density(xj)) return *closed;
  require_quadrature_dim(n);
  const auto& rule = sphere_rule(n);
  Jet vol(xs[0].spec(), 0.0);
  std::vector<Jet> yj(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    for (int i = 0; i < n; ++i) yj[static_cast<std::size_t>(i)] = Jet(xs[0].spec(), rule.nodes[k][i]);
    const Jet f = metric.eval(xj, std::span<const Jet>(yj));
    vol += (rule.weights[k] / n) * pow(f, -static_cast<double>(n));
  }
  return unit_ball_volume(n) / vol;
}

double density(const FinslerMetric& metric, const Vec& x) {
  if (auto closed = metric.closed_bh_density(as_span(x))) return *closed;
  return bh_density(metric, x);
}

Vec cartan_vector(const FundamentalTensor& g, const Tensor& C, const Vec& u, const Vec& v) {
  // C(u, v, .) as a covector, then raise the index
  const Vec cov = C.partial_apply({u, v});
  return g.g_inv * cov;
}

namespace {

void require_minkowski(const FinslerMetric& norm) {
  if (!norm.x_independent())
    throw PreconditionError("indicatrix geometry needs an x-independent norm; " +
                            norm.describe() + " depends on x");
}

struct NormAt {
  FundamentalTensor g;
  Tensor C;
};

NormAt norm_at(const FinslerMetric& norm, const Vec& y) {
  const int n = norm.dim();
  const Jet f2 = norm.squared_jet(Vec::Zero(n), y, 0, 3);
  return {fundamental_tensor(f2, n), y_tensor(f2, n, 3, 0.25)};
}

}  // namespace

Vec indicatrix_riemann(const FinslerMetric& norm, const Vec& y, const Vec& u, const Vec& v,
                       const Vec& w) {
  require_minkowski(norm);
  const double f = norm.eval(Vec::Zero(norm.dim()), y);
  if (std::abs(f - 1.0) > 1e-8) throw PreconditionError("indicatrix_riemann: y is not on S");
  const auto at = norm_at(norm, y);
  for (const Vec* t : {&u, &v, &w}) {
    if (std::abs(y.dot(at.g.g * *t)) > 1e-8 * f * t->norm())
      throw PreconditionError("indicatrix_riemann: argument not tangent to the indicatrix");
  }
  auto gd = [&](const Vec& a, const Vec& b) { return a.dot(at.g.g * b); };
  const Vec cuw = cartan_vector(at.g, at.C, u, w);
  const Vec cvw = cartan_vector(at.g, at.C, v, w);
  return cartan_vector(at.g, at.C, cuw, v) - cartan_vector(at.g, at.C, cvw, u) + gd(v, w) * u -
         gd(u, w) * v;
}

double indicatrix_sectional(const FinslerMetric& norm, const Vec& y, const Vec& u,
                            const Vec& v) {
  const Vec r = indicatrix_riemann(norm, y, u, v, v);
  const auto at = norm_at(norm, y);
  auto gd = [&](const Vec& a, const Vec& b) { return a.dot(at.g.g * b); };
  return gd(r, u) / (gd(u, u) * gd(v, v) - gd(u, v) * gd(u, v));
}

namespace {

// d(theta / F(theta)) applied to e, for theta on the unit sphere.
Vec radial_differential(const FinslerMetric& norm, const Vec& theta, const Vec& e) {
  const int n = norm.dim();
  const Jet f = norm.jet(Vec::Zero(n), theta, 0, 1);
  Vec grad(n);
  for (int i = 0; i < n; ++i) grad[i] = partial(f, {}, {i});
  const double F = f.value();
  return e / F - theta * grad.dot(e) / (F * F);
}

Vec angles_to_point(double s, double t) {
  Vec p(3);
  p << std::sin(s) * std::cos(t), std::sin(s) * std::sin(t), std::cos(s);
  return p;
}

}  // namespace

IndicatrixPatch indicatrix_patch(const FinslerMetric& norm, double s, double t) {
  require_minkowski(norm);
  if (norm.dim() != 3) throw ConfigurationError("indicatrix patch is for n = 3");
  const Vec th = angles_to_point(s, t);
  Vec ts(3), tt(3);
  ts << std::cos(s) * std::cos(t), std::cos(s) * std::sin(t), -std::sin(s);
  tt << -std::sin(s) * std::sin(t), std::sin(s) * std::cos(t), 0.0;
  IndicatrixPatch p;
  p.y = th / norm.eval(Vec::Zero(3), th);
  p.p_s = radial_differential(norm, th, ts);
  p.p_t = radial_differential(norm, th, tt);
  return p;
}

double indicatrix_gauss_oracle(const FinslerMetric& norm, double s, double t) {
  // First fundamental form of the patch in the metric g_y.
  auto form = [&](int which) {
    return [&norm, which](std::span<const double> st) {
      const auto p = indicatrix_patch(norm, st[0], st[1]);
      const auto g = fundamental_tensor(norm.squared_jet(Vec::Zero(3), p.y, 0, 2), 3).g;
      if (which == 0) return p.p_s.dot(g * p.p_s);
      if (which == 1) return p.p_s.dot(g * p.p_t);
      return p.p_t.dot(g * p.p_t);
    };
  };
  const std::vector<double> at = {s, t};
  auto d = [&](int which, int os, int ot) {
    const std::vector<int> orders = {os, ot};
    const auto r = fd_oracle(form(which), at, orders);
    if (!r.ok) throw NumericalIntegrityError("indicatrix Gauss oracle: stencil failed");
    return r.value;
  };
  const double E = form(0)(at), F = form(1)(at), G = form(2)(at);
  const double Eu = d(0, 1, 0), Ev = d(0, 0, 1), Evv = d(0, 0, 2);
  const double Fu = d(1, 1, 0), Fv = d(1, 0, 1), Fuv = d(1, 1, 1);
  const double Gu = d(2, 1, 0), Gv = d(2, 0, 1), Guu = d(2, 2, 0);
  Eigen::Matrix3d a, b;
  a << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
       Fv - 0.5 * Gu, E, F,
       0.5 * Gv, F, G;
  b << 0.0, 0.5 * Ev, 0.5 * Gu,
       0.5 * Ev, E, F,
       0.5 * Gu, F, G;
  const double w = E * G - F * F;
  return (a.determinant() - b.determinant()) / (w * w);
}

namespace {

// Orthonormal tangent basis of S^2 at a unit vector.
std::pair<Vec, Vec> sphere_tangents(const Vec& u) {
  Vec ref = Vec::Zero(3);
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(u[i]) < std::abs(u[k])) k = i;
  ref[k] = 1.0;
  Vec e1 = ref - u * u.dot(ref);
  e1.normalize();
  Eigen::Vector3d a = u, b = e1;
  Vec e2 = a.cross(b);
  return {e1, e2};
}

}  // namespace

double santalo_volume(const FinslerMetric& norm) {
  require_minkowski(norm);
  if (!norm.reversible())
    throw PreconditionError("santalo_volume: the inequality is stated for reversible norms");
  const int n = norm.dim();
  require_quadrature_dim(n);
  const auto& rule = sphere_rule(n);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Vec& u = rule.nodes[k];
    const Vec y = u / norm.eval(Vec::Zero(n), u);
    const auto g = fundamental_tensor(norm.squared_jet(Vec::Zero(n), y, 0, 2), n).g;
    if (n == 2) {
      Vec e(2);
      e << -u[1], u[0];
      const Vec p = radial_differential(norm, u, e);
      total += rule.weights[k] * std::sqrt(p.dot(g * p));
    } else {
      const auto [e1, e2] = sphere_tangents(u);
      const Vec p1 = radial_differential(norm, u, e1);
      const Vec p2 = radial_differential(norm, u, e2);
      const double a = p1.dot(g * p1), b = p1.dot(g * p2), c = p2.dot(g * p2);
      total += rule.weights[k] * std::sqrt(a * c - b * b);
    }
  }
  return total;
}

double indicatrix_bh_volume(const FinslerMetric& norm) {
  require_minkowski(norm);
  if (norm.dim() != 2) throw ConfigurationError("indicatrix_bh_volume is for n = 2");
  const auto& rule = sphere_rule(2);
  const Vec zero = Vec::Zero(2);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Vec& u = rule.nodes[k];
    Vec e(2);
    e << -u[1], u[0];
    const Vec p = radial_differential(norm, u, e);
    const double fp = norm.eval(zero, p), fm = norm.eval(zero, Vec(-p));
    // 1-D Busemann-Hausdorff: length 2 / Vol{t : F(t p) < 1}
    total += rule.weights[k] * 2.0 * fp * fm / (fp + fm);
  }
  return total;
}

}  // namespace finsler
