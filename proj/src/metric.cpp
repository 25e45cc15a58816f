#include "finsler/metric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

namespace finsler {

std::string FinslerMetric::describe() const {
  std::ostringstream os;
  os << id_ << "(n=" << n_;
  for (const auto& [k, v] : params_) os << ", " << k << "=" << v;
  os << ")";
  return os.str();
}

Vec FinslerMetric::sample_point(std::span<const double> u) const {
  const int n = dim();
  const double r = sampling_radius() * std::pow(u[0], 1.0 / n);
  return r * sphere_point(u.subspan(1), n);
}

Jet FinslerMetric::jet(const Vec& x, const Vec& y, int x_order, int y_order) const {
  auto vars = lift(as_span(x), as_span(y), {dim(), x_order, y_order});
  std::span<const Jet> all(vars);
  return eval(all.subspan(0, dim()), all.subspan(dim(), dim()));
}

Jet FinslerMetric::squared_jet(const Vec& x, const Vec& y, int x_order, int y_order) const {
  const Jet f = jet(x, y, x_order, y_order);
  return f * f;
}

TangentSample make_sample(const FinslerMetric& metric, const Vec& x, const Vec& y) {
  if (x.size() != metric.dim() || y.size() != metric.dim())
    throw ConfigurationError("tangent sample dimension does not match the metric");
  if (!metric.in_domain(x)) {
    std::ostringstream os;
    os << "base point (" << x.transpose() << ") is outside the chart of " << metric.describe();
    throw DomainError(os.str());
  }
  const double f = metric.eval(x, y);
  if (!(f > 1e-12)) {
    std::ostringstream os;
    os << "F(x, y) = " << f << " below 1e-12 at y = (" << y.transpose() << ")";
    throw DomainError(os.str());
  }
  return {x, y};
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

Vec sphere_point(std::span<const double> u, int n) {
  Vec p(n);
  if (n == 2) {
    const double a = 2.0 * std::numbers::pi * u[0];
    p << std::cos(a), std::sin(a);
  } else if (n == 3) {
    const double z = 2.0 * u[0] - 1.0;
    const double a = 2.0 * std::numbers::pi * u[1];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    p << s * std::cos(a), s * std::sin(a), z;
  } else {
    boost::math::normal_distribution<> normal;
    for (int i = 0; i < n; ++i) {
      const double ui = std::clamp(u[static_cast<std::size_t>(i) % u.size()], 1e-12, 1.0 - 1e-12);
      p[i] = boost::math::quantile(normal, ui);
    }
    p.normalize();
  }
  return p;
}

std::vector<TangentSample> halton_samples(const FinslerMetric& metric, int count, int skip) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  const int n = metric.dim();
  std::vector<TangentSample> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const int index = k + 1 + skip;
    std::vector<double> u(2 * n + 2);
    for (std::size_t d = 0; d < u.size(); ++d) u[d] = halton(index, kPrimes[d]);
    Vec x = metric.sample_point(std::span<const double>(u).subspan(0, n + 1));
    Vec y = sphere_point(std::span<const double>(u).subspan(n + 1), n);
    out.push_back({std::move(x), std::move(y)});
  }
  return out;
}

ValidationReport check_metric(const FinslerMetric& metric, int count) {
  ValidationReport rep;
  const int n = metric.dim();
  auto fail = [&](const TangentSample& s, const std::string& what) {
    std::ostringstream os;
    os << metric.describe() << ": " << what << " at x = (" << s.x.transpose()
       << "), y = (" << s.y.transpose() << ")";
    rep.ok = false;
    rep.failure = os.str();
    return rep;
  };
  for (const auto& s : halton_samples(metric, count)) {
    ++rep.samples;
    if (!metric.in_domain(s.x)) return fail(s, "validation sample outside chart");
    const double f = metric.eval(s.x, s.y);
    if (!(f > 0.0) || !std::isfinite(f)) return fail(s, "F not positive");
    for (double lambda : {0.5, 2.0}) {
      const double fl = metric.eval(s.x, Vec(lambda * s.y));
      if (std::abs(fl - lambda * f) > 1e-10 * lambda * f)
        return fail(s, "positive homogeneity violated");
    }
    if (metric.reversible()) {
      const double fm = metric.eval(s.x, Vec(-s.y));
      if (std::abs(fm - f) > 1e-10 * f) return fail(s, "reversibility claim violated");
    }
    const Jet f2 = metric.squared_jet(s.x, s.y, 0, 2);
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        MultiIndex b{};
        b[i] += 1;
        b[j] += 1;
        g(i, j) = 0.5 * f2.partial(MultiIndex{}, b);
      }
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff())
      return fail(s, "fundamental tensor not positive definite");
  }
  return rep;
}

void validate_metric(const FinslerMetric& metric, int count) {
  auto rep = check_metric(metric, count);
  if (!rep.ok) throw MetricValidityError(rep.failure);
}

}  // namespace finsler
