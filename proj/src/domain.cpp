#include "finsler/domain.hpp"

#include <cmath>
#include <sstream>

#include "finsler/quadrature.hpp"

namespace finsler {

ConvexDomain::ConvexDomain(int n, Kind kind, double eps) : n_(n), kind_(kind), eps_(eps) {
  if (n < 2 || n > kMaxDim) throw ConfigurationError("domain dimension out of range");
  // Hessian of phi is 2 I + 12 eps diag(z^2); on the boundary z_i^2 <= 1 for
  // eps >= 0, and for eps < 0 we need 2 + 12 eps z_i^2 > 0 wherever phi = 0.
  if (eps < -1.0 / 12.0 + 1e-9)
    throw ConfigurationError("quartic domain perturbation too negative for strong convexity");
}

ConvexDomain ConvexDomain::unit_ball(int n) { return {n, Kind::unit_ball, 0.0}; }
ConvexDomain ConvexDomain::quartic(int n, double eps) {
  return {n, Kind::quartic_perturbed, eps};
}

ConvexDomain ConvexDomain::parse(const std::string& text, int n) {
  if (text == "ball" || text.empty()) return unit_ball(n);
  const std::string prefix = "quartic";
  if (text.rfind(prefix, 0) == 0) {
    double eps = 0.1;
    if (text.size() > prefix.size()) {
      if (text[prefix.size()] != ':')
        throw ConfigurationError("domain must be 'ball' or 'quartic:<eps>'");
      try {
        eps = std::stod(text.substr(prefix.size() + 1));
      } catch (const std::exception&) {
        throw ConfigurationError("bad quartic domain parameter in '" + text + "'");
      }
    }
    return quartic(n, eps);
  }
  throw ConfigurationError("unknown domain '" + text + "' (expected 'ball' or 'quartic:<eps>')");
}

std::string ConvexDomain::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::unit_ball)
    os << "ball";
  else
    os << "quartic:" << eps_;
  return os.str();
}

double ConvexDomain::exit_parameter(std::span<const double> x,
                                    std::span<const double> v) const {
  std::vector<double> z(x.size());
  auto eval = [&](double t, double* deriv) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + t * v[i];
    std::span<const double> zs(z);
    if (deriv) {
      double d = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) d += dphi(zs, i) * v[i];
      *deriv = d;
    }
    return phi(zs);
  };
  double vv = 0.0;
  for (double c : v) vv += c * c;
  if (!(vv > 0.0)) throw GeometryError("exit_parameter: zero direction");
  const double p0 = eval(0.0, nullptr);
  if (!(p0 < 0.0)) throw GeometryError("exit_parameter: base point not inside the domain");

  double lo = 0.0, hi = 1.0 / std::sqrt(vv);
  int doublings = 0;
  while (eval(hi, nullptr) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) throw GeometryError("exit_parameter: ray never exits the domain");
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double d = 0.0;
    const double p = eval(t, &d);
    if (p == 0.0) return t;
    if (p < 0.0)
      lo = t;
    else
      hi = t;
    double next = (d != 0.0) ? t - p / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::abs(t) || hi - lo <= 1e-16 * hi) return next;
    t = next;
  }
  return t;
}

double ConvexDomain::volume() const {
  const auto& rule = sphere_rule(n_);
  std::vector<double> origin(n_, 0.0);
  double v = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double r = exit_parameter(origin, as_span(rule.nodes[k]));
    v += rule.weights[k] * std::pow(r, n_) / n_;
  }
  return v;
}

double funk_unit_ball(const Vec& x, const Vec& y) {
  if (x.squaredNorm() >= 1.0) throw DomainError("funk_unit_ball: |x| >= 1 is outside the chart");
  return funk_unit_ball<double>(as_span(x), as_span(y));
}

double funk_general(const ConvexDomain& domain, std::span<const double> x,
                    std::span<const double> y) {
  if (!domain.contains(x)) throw DomainError("funk_general: base point outside the domain");
  return 1.0 / domain.exit_parameter(x, y);
}

double funk_general(const ConvexDomain& domain, const Vec& x, const Vec& y) {
  return funk_general(domain, as_span(x), as_span(y));
}

Jet funk_general(const ConvexDomain& domain, std::span<const Jet> x, std::span<const Jet> y) {
  const std::size_t n = x.size();
  std::vector<double> x0(n), y0(n);
  for (std::size_t i = 0; i < n; ++i) {
    x0[i] = x[i].value();
    y0[i] = y[i].value();
  }
  const double t0 = 1.0 / funk_general(domain, x0, y0);
  Jet t(x[0].spec(), t0);
  // Each Newton step doubles the number of correct orders.
  int sweeps = 1;
  while ((1 << sweeps) <= x[0].spec().total_order() + 1) ++sweeps;
  std::vector<Jet> z(n);
  for (int s = 0; s < sweeps + 1; ++s) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + t * y[i];
    std::span<const Jet> zs(z);
    const Jet p = domain.phi(zs);
    Jet dp = domain.dphi(zs, 0) * y[0];
    for (std::size_t i = 1; i < n; ++i) dp += domain.dphi(zs, i) * y[i];
    t -= p / dp;
  }
  return 1.0 / t;
}

double hilbert_general(const ConvexDomain& domain, const Vec& x, const Vec& y) {
  return 0.5 * (funk_general(domain, x, y) + funk_general(domain, x, Vec(-y)));
}

double funk_distance(const ConvexDomain& domain, const Vec& p, const Vec& q) {
  if (!domain.contains(p) || !domain.contains(q))
    throw DomainError("funk_distance: points must be interior");
  const Vec v = q - p;
  if (v.norm() == 0.0) return 0.0;
  const double t = domain.exit_parameter(as_span(p), as_span(v));
  if (!(t > 1.0)) throw GeometryError("funk_distance: exit point precedes q");
  return std::log(t / (t - 1.0));
}

double hilbert_distance(const ConvexDomain& domain, const Vec& p, const Vec& q) {
  return 0.5 * (funk_distance(domain, p, q) + funk_distance(domain, q, p));
}

}  // namespace finsler
