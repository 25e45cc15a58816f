#include "finsler/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "finsler/curvature.hpp"
#include "finsler/domain.hpp"
#include "finsler/errors.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/spray.hpp"

namespace finsler {

namespace {

// symmetric half-rules from boost expanded to [-1, 1]
template <class Rule>
std::vector<std::pair<double, double>> full_rule() {
  std::vector<std::pair<double, double>> out;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.emplace_back(x[i], w[i]);
    if (x[i] != 0.0) out.emplace_back(-x[i], w[i]);
  }
  return out;
}

struct PolarRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;
  std::vector<double> coarse;  // weights of the half-resolution rule (0 off it)
};

PolarRule polar_rule(int n, const VolumeOptions& opts) {
  const double pi = std::numbers::pi;
  PolarRule r;
  if (n == 2) {
    const int m = std::max(8, opts.angles + (opts.angles % 2));
    for (int k = 0; k < m; ++k) {
      const double a = 2.0 * pi * k / m;
      Vec p(2);
      p << std::cos(a), std::sin(a);
      r.nodes.push_back(p);
      r.weights.push_back(2.0 * pi / m);
      r.coarse.push_back(k % 2 == 0 ? 4.0 * pi / m : 0.0);
    }
    return r;
  }
  if (n != 3) throw ConfigurationError("ball volumes are implemented for n = 2 and n = 3");
  std::vector<std::pair<double, double>> zs;
  if (opts.polar_z == 8)
    zs = full_rule<boost::math::quadrature::gauss<double, 8>>();
  else if (opts.polar_z == 16)
    zs = full_rule<boost::math::quadrature::gauss<double, 16>>();
  else
    throw ConfigurationError("polar_z must be 8 or 16");
  // the coarse rule keeps every other azimuth
  const int az = 2 * opts.polar_z;
  for (const auto& [z, wz] : zs) {
    const double s = std::sqrt(1.0 - z * z);
    for (int k = 0; k < az; ++k) {
      const double a = 2.0 * pi * k / az;
      Vec p(3);
      p << s * std::cos(a), s * std::sin(a), z;
      r.nodes.push_back(p);
      r.weights.push_back(wz * 2.0 * pi / az);
      r.coarse.push_back(k % 2 == 0 ? wz * 4.0 * pi / az : 0.0);
    }
  }
  return r;
}

// The same rule pushed through u = L w / |L w| with L the square root of the
// second-moment matrix of the tangent unit ball at x, so that the nodes
// follow the shape of the indicatrix.  Jacobian det L / |L w|^n.
PolarRule adapted_rule(const FinslerMetric& metric, const Vec& x, const VolumeOptions& opts) {
  const int n = metric.dim();
  const SphereRule& ref = sphere_rule(n, 720);
  Mat M = Mat::Zero(n, n);
  for (std::size_t k = 0; k < ref.nodes.size(); ++k) {
    const Vec& u = ref.nodes[k];
    M += ref.weights[k] * std::pow(metric.eval(x, u), -(n + 2)) * (u * u.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  const Vec ev = es.eigenvalues() / es.eigenvalues().maxCoeff();
  const Mat L = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const double detL = ev.cwiseSqrt().prod();
  PolarRule r = polar_rule(n, opts);
  for (std::size_t k = 0; k < r.nodes.size(); ++k) {
    const Vec lw = L * r.nodes[k];
    const double len = lw.norm();
    const double jac = detL / std::pow(len, n);
    r.nodes[k] = lw / len;
    r.weights[k] *= jac;
    r.coarse[k] *= jac;
  }
  return r;
}

GeodesicOptions tight() {
  GeodesicOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-12;
  o.max_step = 0.05;
  return o;
}

// Euclidean orthonormal basis of u-perp
std::vector<Vec> tangent_basis(const Vec& u) {
  const int n = static_cast<int>(u.size());
  Mat m = Mat::Identity(n, n);
  m.col(0) = u;
  Eigen::HouseholderQR<Mat> qr(m);
  const Mat q = qr.householderQ();
  std::vector<Vec> out;
  for (int a = 1; a < n; ++a) out.push_back(q.col(a));
  return out;
}

struct RadialProfile {
  std::vector<double> value;  // sigma(Phi) |det dPhi| at the requested times
  bool exited = false;
  bool sign_change = false;
};

// Polar integrand along the radial geodesic t -> exp_x(t u / F(x, u)).  The
// angular derivatives use the 4-point central stencil in s on u + s e_a.
RadialProfile radial_profile(const FinslerMetric& metric, const Vec& x, const Vec& u,
                             const std::vector<double>& times) {
  const int n = metric.dim();
  RadialProfile out;
  const GeodesicOptions opts = tight();
  auto shoot = [&](const Vec& w) {
    return geodesic_samples(metric, x, Vec(w / metric.eval(x, w)), times, opts);
  };
  std::vector<PathSample> base;
  std::vector<std::vector<Vec>> jac(n - 1);
  const double d = 1e-3;
  try {
    base = shoot(u);
    const auto basis = tangent_basis(u);
    for (int a = 0; a < n - 1; ++a) {
      const auto p1 = shoot(u + d * basis[a]);
      const auto m1 = shoot(u - d * basis[a]);
      const auto p2 = shoot(u + 2 * d * basis[a]);
      const auto m2 = shoot(u - 2 * d * basis[a]);
      for (std::size_t k = 0; k < times.size(); ++k)
        jac[a].push_back((8.0 * (p1[k].x - m1[k].x) - (p2[k].x - m2[k].x)) / (12.0 * d));
    }
  } catch (const RangeError&) {
    out.exited = true;
    out.value.assign(times.size(), 0.0);
    return out;
  }
  int sign0 = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    Mat m(n, n);
    m.col(0) = base[k].v;
    for (int a = 0; a < n - 1; ++a) m.col(a + 1) = jac[a][k];
    const double det = m.determinant();
    const int sg = det > 0 ? 1 : (det < 0 ? -1 : 0);
    if (sign0 == 0) sign0 = sg;
    else if (sg != 0 && sg != sign0) out.sign_change = true;
    out.value.push_back(density(metric, base[k].x) * std::abs(det));
  }
  return out;
}

struct RadialRule {
  std::vector<double> t;
  std::vector<double> wk;  // 15-point Kronrod weights on [0, r]
  std::vector<double> wg;  // Gauss weights (0 on Kronrod-only nodes)
};

RadialRule radial_rule(double r) {
  const auto k = full_rule<boost::math::quadrature::gauss_kronrod<double, 15>>();
  const auto g = full_rule<boost::math::quadrature::gauss<double, 7>>();
  RadialRule rule;
  for (const auto& [x, w] : k) {
    rule.t.push_back(0.5 * r * (1.0 + x));
    rule.wk.push_back(0.5 * r * w);
    double wg = 0.0;
    for (const auto& [xg, w2] : g)
      if (std::abs(xg - x) < 1e-12) wg = 0.5 * r * w2;
    rule.wg.push_back(wg);
  }
  // ascending times for the stops
  std::vector<std::size_t> idx(rule.t.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rule.t[a] < rule.t[b]; });
  RadialRule sorted;
  for (auto i : idx) {
    sorted.t.push_back(rule.t[i]);
    sorted.wk.push_back(rule.wk[i]);
    sorted.wg.push_back(rule.wg[i]);
  }
  return sorted;
}

MeasureEstimate polar_volume(const FinslerMetric& metric, const Vec& x, double r,
                             const VolumeOptions& opts) {
  const PolarRule ang = adapted_rule(metric, x, opts);
  const RadialRule rad = radial_rule(r);
  double fine = 0.0, coarse = 0.0, radial_err = 0.0;
  bool exited = false, conj = false;
  for (std::size_t a = 0; a < ang.nodes.size(); ++a) {
    const RadialProfile p = radial_profile(metric, x, ang.nodes[a], rad.t);
    exited |= p.exited;
    conj |= p.sign_change;
    double k = 0.0, g = 0.0;
    for (std::size_t i = 0; i < rad.t.size(); ++i) {
      k += rad.wk[i] * p.value[i];
      g += rad.wg[i] * p.value[i];
    }
    fine += ang.weights[a] * k;
    coarse += ang.coarse[a] * k;
    radial_err += ang.weights[a] * std::abs(k - g);
  }
  MeasureEstimate e;
  e.value = fine;
  e.stderr_ = std::abs(fine - coarse) + radial_err;
  e.method = EstimateMethod::quadrature;
  e.n_samples = static_cast<long long>(ang.nodes.size());
  e.flagged = exited || conj;
  if (exited) e.note = "lower bound: a radial geodesic left the chart";
  else if (conj) e.note = "lower bound: radius beyond a conjugate point";
  return e;
}

MeasureEstimate closed_form_volume(const FinslerMetric& metric, const BallSpec& ball,
                                   const VolumeOptions& opts) {
  const int n = metric.dim();
  const ConvexDomain dom = ConvexDomain::parse(ball.domain, n);
  if (!dom.contains(ball.center)) throw DomainError("ball centre outside the domain");
  auto dist = [&](const Vec& z) {
    return ball.source == DistanceSource::funk_closed_form ? funk_distance(dom, ball.center, z)
                                                           : hilbert_distance(dom, ball.center, z);
  };
  // Straight lines are geodesics, so along each ray the distance is monotone:
  // bound the ball's Euclidean radius by bisection on a fan of rays.
  double R = 0.0;
  const SphereRule& fan = sphere_rule(n, 360);
  for (const Vec& u : fan.nodes) {
    const double exit = dom.exit_parameter(as_span(ball.center), as_span(u));
    double lo = 0.0, hi = exit * (1.0 - 1e-15);
    if (dist(Vec(ball.center + hi * u)) < ball.radius) {
      R = std::max(R, exit);
      continue;
    }
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dist(Vec(ball.center + mid * u)) < ball.radius ? lo : hi) = mid;
    }
    R = std::max(R, hi);
  }
  R *= 1.05;

  const int shells = std::max(1, opts.shells);
  const long long per = std::max<long long>(2, opts.samples / shells);
  const double shell_vol = unit_ball_volume(n) * std::pow(R, n) / shells;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  double value = 0.0, var = 0.0;
  long long accepted = 0;
  for (int s = 0; s < shells; ++s) {
    double sum = 0.0, sum2 = 0.0;
    for (long long i = 0; i < per; ++i) {
      Vec u(n);
      for (int j = 0; j < n; ++j) u[j] = normal(rng);
      u.normalize();
      const double rho = R * std::pow((s + unif(rng)) / shells, 1.0 / n);
      const Vec z = ball.center + rho * u;
      double f = 0.0;
      if (dom.contains(z) && dist(z) < ball.radius) {
        f = density(metric, z);
        ++accepted;
      }
      sum += f;
      sum2 += f * f;
    }
    const double mean = sum / per;
    const double v = std::max(0.0, sum2 / per - mean * mean);
    value += shell_vol * mean;
    var += shell_vol * shell_vol * v / (per - 1);
  }
  MeasureEstimate e;
  e.value = value;
  e.stderr_ = std::sqrt(var);
  e.method = EstimateMethod::monte_carlo;
  e.n_samples = per * shells;
  e.seed = opts.seed;
  if (accepted == 0) {
    e.flagged = true;
    e.note = "zero acceptance";
  }
  return e;
}

}  // namespace

MeasureEstimate bh_volume(const FinslerMetric& metric,
                          const std::function<bool(const Vec&)>& indicator, const Vec& lo,
                          const Vec& hi, long long samples, std::uint64_t seed) {
  const int n = metric.dim();
  if (lo.size() != n || hi.size() != n) throw ConfigurationError("box dimension mismatch");
  if ((hi - lo).minCoeff() <= 0.0) throw ConfigurationError("empty box");
  if (samples < 2) throw ConfigurationError("need at least two samples");
  const double box = (hi - lo).prod();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif;
  double sum = 0.0, sum2 = 0.0;
  long long accepted = 0;
  Vec z(n);
  for (long long i = 0; i < samples; ++i) {
    for (int j = 0; j < n; ++j) z[j] = lo[j] + (hi[j] - lo[j]) * unif(rng);
    if (!metric.in_domain(z) || !indicator(z)) continue;
    const double f = density(metric, z);
    sum += f;
    sum2 += f * f;
    ++accepted;
  }
  MeasureEstimate e;
  e.method = EstimateMethod::monte_carlo;
  e.n_samples = samples;
  e.seed = seed;
  if (accepted == 0) {
    e.flagged = true;
    e.note = "zero acceptance";
    return e;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sum2 / samples - mean * mean);
  e.value = box * mean;
  e.stderr_ = box * std::sqrt(var / (samples - 1));
  return e;
}

std::string to_string(DistanceSource s) {
  switch (s) {
    case DistanceSource::funk_closed_form: return "funk_closed_form";
    case DistanceSource::hilbert_closed_form: return "hilbert_closed_form";
    case DistanceSource::geodesic_polar: return "geodesic_polar";
  }
  return "?";
}

DistanceSource parse_distance_source(const std::string& s) {
  if (s == "funk_closed_form") return DistanceSource::funk_closed_form;
  if (s == "hilbert_closed_form") return DistanceSource::hilbert_closed_form;
  if (s == "geodesic_polar") return DistanceSource::geodesic_polar;
  throw ConfigurationError("unknown distance source: " + s);
}

MeasureEstimate ball_volume(const FinslerMetric& metric, const BallSpec& ball,
                            const VolumeOptions& opts) {
  if (ball.center.size() != metric.dim()) throw ConfigurationError("ball centre dimension");
  if (!(ball.radius > 0.0)) throw ConfigurationError("ball radius must be positive");
  if (!metric.in_domain(ball.center)) throw DomainError("ball centre outside the chart");
  if (ball.source == DistanceSource::geodesic_polar)
    return polar_volume(metric, ball.center, ball.radius, opts);
  return closed_form_volume(metric, ball, opts);
}

double sphere_area(const FinslerMetric& metric, const Vec& x, double r,
                   const VolumeOptions& opts) {
  if (!(r > 0.0)) throw ConfigurationError("sphere radius must be positive");
  const PolarRule ang = adapted_rule(metric, x, opts);
  double area = 0.0;
  for (std::size_t a = 0; a < ang.nodes.size(); ++a) {
    if (ang.weights[a] == 0.0) continue;
    const RadialProfile p = radial_profile(metric, x, ang.nodes[a], {r});
    if (p.exited) throw RangeError("sphere_area: radius leaves the chart");
    area += ang.weights[a] * p.value[0];
  }
  return area;
}

double funk_ball_formula(int n, double r) {
  if (n < 2) throw ConfigurationError("funk_ball_formula needs n >= 2");
  if (!(r > 0.0)) throw ConfigurationError("radius must be positive");
  // e^{-(n+1)t} sinh^{n-1} t without inf * 0 for large t
  auto f = [n](double t) {
    return std::exp(-2.0 * t) * std::pow(-std::expm1(-2.0 * t) / 2.0, n - 1);
  };
  const double upper = std::isinf(r) ? std::numeric_limits<double>::infinity() : r / 2.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, 0.0, upper, 15, 1e-14);
  return n * std::pow(2.0, n) * unit_ball_volume(n) * integral;
}

double small_ball_r(const FinslerMetric& metric, const Vec& x, int angles) {
  const int n = metric.dim();
  VolumeOptions o;
  o.angles = angles;
  o.polar_z = 8;
  const PolarRule ang = adapted_rule(metric, x, o);
  const double sigma = density(metric, x);
  double sum = 0.0;
  for (std::size_t a = 0; a < ang.nodes.size(); ++a) {
    if (ang.weights[a] == 0.0) continue;
    const TangentSample s = make_sample(metric, x, ang.nodes[a]);
    const double ric = riemann_curvature(metric, s).ricci;
    const SData sd = s_curvature(metric, s);
    const double h = ric + 3.0 * n * (sd.S_dot - sd.S * sd.S);
    sum += ang.weights[a] * h * std::pow(metric.eval(x, ang.nodes[a]), -(n + 2));
  }
  return sigma * sum / (n * unit_ball_volume(n));
}

SmallBallReport small_ball_probe(const FinslerMetric& metric, const Vec& x,
                                 const std::vector<double>& eps_grid, const VolumeOptions& opts,
                                 bool require_reversible) {
  if (require_reversible && !metric.reversible())
    throw PreconditionError("small_ball_probe: the expansion needs a reversible metric");
  if (eps_grid.size() < 3) throw ConfigurationError("small_ball_probe: need three radii");
  const auto [lo, hi] = std::minmax_element(eps_grid.begin(), eps_grid.end());
  if (!(*lo > 0.0) || *hi > 0.1)
    throw ConfigurationError("small_ball_probe: radii must lie in (0, 0.1]");
  if (*hi < 2.0 * *lo)
    throw ConfigurationError("small_ball_probe: radius grid too narrow for the fit");
  const int n = metric.dim();
  SmallBallReport rep;
  rep.reversible = metric.reversible();
  rep.eps = eps_grid;
  Mat A(eps_grid.size(), 2);
  Vec b(eps_grid.size());
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double e = eps_grid[i];
    const MeasureEstimate v = polar_volume(metric, x, e, opts);
    if (v.flagged) throw RangeError("small_ball_probe: " + v.note);
    const double q = v.value / (unit_ball_volume(n) * std::pow(e, n));
    rep.q.push_back(q);
    A(i, 0) = e * e;
    A(i, 1) = e * e * e;
    b[i] = q - 1.0;
  }
  const Vec c = A.colPivHouseholderQr().solve(b);
  rep.c2 = c[0];
  rep.c3 = c[1];
  rep.r_x = small_ball_r(metric, x);
  rep.c2_from_r = -rep.r_x / (6.0 * (n + 2));
  return rep;
}

}  // namespace finsler
