#include "finsler/zoo.hpp"

#include <cmath>
#include <sstream>

#include "finsler/quadrature.hpp"

namespace finsler {

namespace {

template <class T>
T sum_squares(std::span<const T> v, std::size_t count) {
  T s = v[0] * v[0];
  for (std::size_t i = 1; i < count; ++i) s += v[i] * v[i];
  return s;
}

class RandersMetric final : public MetricBase<RandersMetric> {
 public:
  explicit RandersMetric(const RandersData& d, std::string id, ParamMap params)
      : MetricBase(d.n, std::move(id), std::move(params)), data_(d) {
    if (d.alpha == AlphaKind::hyperbolic_line && d.n != 3)
      throw ConfigurationError("hyperbolic_line alpha requires n = 3");
  }

  bool reversible() const override { return data_.beta == BetaKind::zero; }
  bool x_independent() const override {
    return data_.alpha == AlphaKind::flat &&
           (data_.beta == BetaKind::zero || data_.beta == BetaKind::constant);
  }

  bool in_domain(std::span<const double> x) const override {
    switch (data_.alpha) {
      case AlphaKind::flat:
        return data_.beta != BetaKind::exact || sum_squares(x, x.size()) < 1.0;
      case AlphaKind::sphere: return sum_squares(x, x.size()) < 1e6;
      case AlphaKind::hyperbolic: return sum_squares(x, x.size()) < 1.0;
      case AlphaKind::hyperbolic_line: return x[0] * x[0] + x[1] * x[1] < 1.0;
    }
    return false;
  }

  double sampling_radius() const override {
    switch (data_.alpha) {
      case AlphaKind::flat: return data_.beta == BetaKind::exact ? 0.6 : 1.0;
      case AlphaKind::sphere: return 1.0;
      case AlphaKind::hyperbolic: return 0.6;
      case AlphaKind::hyperbolic_line: return 0.6;
    }
    return 0.5;
  }

  // Diagonal entries of a_ij(x).
  template <class T>
  std::vector<T> alpha_diag(std::span<const T> x) const {
    const std::size_t n = x.size();
    std::vector<T> d;
    d.reserve(n);
    switch (data_.alpha) {
      case AlphaKind::flat:
        d.assign(n, constant_like(x[0], 1.0));
        break;
      case AlphaKind::sphere:
      case AlphaKind::hyperbolic: {
        const double sign = data_.alpha == AlphaKind::sphere ? 1.0 : -1.0;
        const T c = 1.0 + sign * sum_squares(x, n);
        d.assign(n, 4.0 / (c * c));
        break;
      }
      case AlphaKind::hyperbolic_line: {
        const T c = 1.0 - (x[0] * x[0] + x[1] * x[1]);
        const T h = 4.0 / (c * c);
        d = {h, h, constant_like(x[0], 1.0)};
        break;
      }
    }
    return d;
  }

  template <class T>
  std::vector<T> beta_form(std::span<const T> x) const {
    const std::size_t n = x.size();
    const double s = data_.strength;
    std::vector<T> b(n, constant_like(x[0], 0.0));
    using std::cos;
    using std::sin;
    switch (data_.beta) {
      case BetaKind::zero: break;
      case BetaKind::constant: b[n - 1] = constant_like(x[0], s); break;
      case BetaKind::rotating:
        b[0] = s * cos(x[1]);
        b[1] = s * sin(x[1]);
        break;
      case BetaKind::exact:
        b[0] = s * (1.0 + 0.3 * x[1]);
        b[1] = (0.3 * s) * x[0];
        break;
    }
    return b;
  }

  template <class T>
  T value(std::span<const T> x, std::span<const T> y) const {
    const auto a = alpha_diag(x);
    T alpha2 = a[0] * y[0] * y[0];
    for (std::size_t i = 1; i < y.size(); ++i) alpha2 += a[i] * y[i] * y[i];
    using std::sqrt;
    T f = sqrt(alpha2);
    if (data_.beta != BetaKind::zero) {
      const auto b = beta_form(x);
      for (std::size_t i = 0; i < y.size(); ++i) f += b[i] * y[i];
    }
    return f;
  }

  template <class T>
  T beta_norm2(std::span<const T> x) const {
    const auto a = alpha_diag(x);
    const auto b = beta_form(x);
    T s = b[0] * b[0] / a[0];
    for (std::size_t i = 1; i < b.size(); ++i) s += b[i] * b[i] / a[i];
    return s;
  }

  // (1 - ||beta||^2)^((n+1)/2) sqrt(det a)
  template <class T>
  T bh_density(std::span<const T> x) const {
    const auto a = alpha_diag(x);
    T det = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) det *= a[i];
    using std::pow;
    using std::sqrt;
    const double n = static_cast<double>(x.size());
    return pow(1.0 - beta_norm2(x), 0.5 * (n + 1.0)) * sqrt(det);
  }

  const RandersData& data() const { return data_; }

 private:
  RandersData data_;
};

class QuarticNorm final : public MetricBase<QuarticNorm> {
 public:
  QuarticNorm(int n, double eps) : MetricBase(n, "quartic_norm", {{"eps", eps}}), eps_(eps) {}

  bool reversible() const override { return true; }
  bool x_independent() const override { return true; }
  bool in_domain(std::span<const double>) const override { return true; }
  double sampling_radius() const override { return 1.0; }

  template <class T>
  T value(std::span<const T>, std::span<const T> y) const {
    const T r2 = sum_squares(y, y.size());
    T q = y[0] * y[0] * y[0] * y[0];
    for (std::size_t i = 1; i < y.size(); ++i) q += y[i] * y[i] * y[i] * y[i];
    using std::pow;
    return pow(r2 * r2 + eps_ * q, 0.25);
  }

  template <class T>
  T bh_density(std::span<const T> x) const {
    return constant_like(x[0], density_);
  }

  void set_density(double d) { density_ = d; }

 private:
  double eps_;
  double density_ = 1.0;
};

class FunkMetric final : public MetricBase<FunkMetric> {
 public:
  explicit FunkMetric(const ConvexDomain& domain)
      : MetricBase(domain.dim(), "funk", domain_params(domain)), domain_(domain) {
    // The unit body {F(x, .) < 1} is Omega - x, so sigma_F = Vol(B^n) / Vol(Omega).
    density_ = domain.kind() == ConvexDomain::Kind::unit_ball
                   ? 1.0
                   : unit_ball_volume(domain.dim()) / domain.volume();
  }

  static ParamMap domain_params(const ConvexDomain& d) {
    if (d.kind() == ConvexDomain::Kind::unit_ball) return {};
    return {{"domain_eps", d.eps()}};
  }

  bool reversible() const override { return false; }
  bool in_domain(std::span<const double> x) const override { return domain_.contains(x); }
  double sampling_radius() const override { return 0.5; }

  template <class T>
  T value(std::span<const T> x, std::span<const T> y) const {
    if (domain_.kind() == ConvexDomain::Kind::unit_ball) return funk_unit_ball<T>(x, y);
    return funk_general(domain_, x, y);
  }

  template <class T>
  T bh_density(std::span<const T> x) const {
    return constant_like(x[0], density_);
  }

  const ConvexDomain& domain() const { return domain_; }

 private:
  ConvexDomain domain_;
  double density_ = 1.0;
};

class HilbertMetric final : public MetricBase<HilbertMetric> {
 public:
  explicit HilbertMetric(const ConvexDomain& domain)
      : MetricBase(domain.dim(), "hilbert", FunkMetric::domain_params(domain)),
        funk_(domain) {}

  bool reversible() const override { return true; }
  bool in_domain(std::span<const double> x) const override {
    return funk_.domain().contains(x);
  }
  double sampling_radius() const override { return 0.5; }

  template <class T>
  T value(std::span<const T> x, std::span<const T> y) const {
    std::vector<T> neg(y.begin(), y.end());
    for (auto& v : neg) v = -v;
    return 0.5 * (funk_.value<T>(x, y) + funk_.value<T>(x, std::span<const T>(neg)));
  }

  // On the ball the Hilbert metric is the Klein model with
  // sqrt(det a) = (1 - |x|^2)^(-(n+1)/2).
  std::optional<double> closed_bh_density(std::span<const double> x) const override {
    if (!on_ball()) return std::nullopt;
    return klein_density<double>(x);
  }
  std::optional<Jet> closed_bh_density(std::span<const Jet> x) const override {
    if (!on_ball()) return std::nullopt;
    return klein_density<Jet>(x);
  }

 private:
  bool on_ball() const { return funk_.domain().kind() == ConvexDomain::Kind::unit_ball; }

  template <class T>
  T klein_density(std::span<const T> x) const {
    using std::pow;
    return pow(1.0 - sum_squares(x, x.size()), -0.5 * (x.size() + 1.0));
  }

  FunkMetric funk_;
};

template <class M>
std::shared_ptr<const M> validated(std::shared_ptr<M> m) {
  validate_metric(*m, 100);
  return m;
}

double quartic_norm_density(const QuarticNorm& q) {
  // Vol{F < 1} = (1/n) int_{S^{n-1}} F(theta)^{-n} d theta
  const int n = q.dim();
  const auto& rule = sphere_rule(n);
  const Vec zero = Vec::Zero(n);
  double vol = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    vol += rule.weights[k] * std::pow(q.eval(zero, rule.nodes[k]), -n) / n;
  return unit_ball_volume(n) / vol;
}

}  // namespace

MetricPtr make_randers(const RandersData& data) {
  std::string id = "randers";
  ParamMap params = {{"strength", data.strength}};
  if (data.beta == BetaKind::zero) {
    params.clear();
    switch (data.alpha) {
      case AlphaKind::flat: id = "euclidean"; break;
      case AlphaKind::sphere: id = "sphere"; break;
      case AlphaKind::hyperbolic: id = "hyperbolic"; break;
      case AlphaKind::hyperbolic_line: id = "hyperbolic_line"; break;
    }
  } else if (data.alpha == AlphaKind::hyperbolic_line && data.beta == BetaKind::constant) {
    id = "berwald_product";
    params = {{"b", data.strength}};
  } else if (data.beta == BetaKind::exact) {
    id = "randers_exact";
  } else if (data.beta == BetaKind::constant) {
    id = "randers_constant";
  }
  auto m = std::make_shared<RandersMetric>(data, id, params);
  for (const auto& s : halton_samples(*m, 100)) {
    const double b2 = m->beta_norm2<double>(as_span(s.x));
    if (!(b2 < 1.0)) {
      std::ostringstream os;
      os << m->describe() << ": alpha-norm of beta is " << std::sqrt(b2)
         << " >= 1 at x = (" << s.x.transpose() << ")";
      throw MetricValidityError(os.str());
    }
  }
  return validated(m);
}

MetricPtr make_euclidean(int n) { return make_randers({n, AlphaKind::flat, BetaKind::zero, 0.0}); }
MetricPtr make_sphere(int n) { return make_randers({n, AlphaKind::sphere, BetaKind::zero, 0.0}); }
MetricPtr make_hyperbolic(int n) {
  return make_randers({n, AlphaKind::hyperbolic, BetaKind::zero, 0.0});
}
MetricPtr make_berwald_product(double b) {
  return make_randers({3, AlphaKind::hyperbolic_line, BetaKind::constant, b});
}

MetricPtr make_quartic_norm(int n, double eps) {
  auto m = std::make_shared<QuarticNorm>(n, eps);
  validate_metric(*m, 100);
  if (n <= 3) m->set_density(quartic_norm_density(*m));
  // PD sweep over directions; for n = 2 this is the full 360-degree sweep.
  if (n == 2) {
    for (int k = 0; k < 360; ++k) {
      const double a = k * std::numbers::pi / 180.0;
      Vec y(2);
      y << std::cos(a), std::sin(a);
      const Jet f2 = m->squared_jet(Vec::Zero(2), y, 0, 2);
      Mat g(2, 2);
      g << 0.5 * f2.partial({}, make_index({2, 0})), 0.5 * f2.partial({}, make_index({1, 1})),
          0.5 * f2.partial({}, make_index({1, 1})), 0.5 * f2.partial({}, make_index({0, 2}));
      if (g.determinant() <= 0.0 || g(0, 0) <= 0.0) {
        std::ostringstream os;
        os << m->describe() << ": fundamental tensor not positive definite at angle " << k;
        throw MetricValidityError(os.str());
      }
    }
  }
  return m;
}

MetricPtr make_funk(const ConvexDomain& domain) {
  return validated(std::make_shared<FunkMetric>(domain));
}

MetricPtr make_hilbert(const ConvexDomain& domain) {
  return validated(std::make_shared<HilbertMetric>(domain));
}

Vec okada_residual(const FinslerMetric& metric, const Vec& x, const Vec& y) {
  const int n = metric.dim();
  const Jet f = metric.jet(x, y, 1, 1);
  Vec r(n);
  for (int i = 0; i < n; ++i)
    r[i] = f.partial(unit_index(i), {}) - f.value() * f.partial({}, unit_index(i));
  return r;
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"euclidean", "flat metric |y|"},
      {"sphere", "round sphere chart 2|y|/(1+|x|^2), curvature +1"},
      {"hyperbolic", "Poincare ball 2|y|/(1-|x|^2), curvature -1"},
      {"randers", "|y| + strength (cos x2 dx1 + sin x2 dx2), non-closed beta"},
      {"randers_exact", "|y| + d(strength (x1 + 0.3 x1 x2)), closed beta on |x| < 1"},
      {"berwald_product", "H^2 x R with beta = b dx3 (n = 3), Berwald"},
      {"quartic_norm", "Minkowski norm (|y|^4 + eps sum y_i^4)^(1/4)"},
      {"funk", "Funk metric of a strongly convex domain"},
      {"hilbert", "Hilbert metric of a strongly convex domain"},
  };
  return entries;
}

MetricPtr make_metric(const std::string& id, int n, const ParamMap& params,
                      const std::string& domain) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  for (const auto& [key, value] : params) {
    (void)value;
    if (key != "strength" && key != "b" && key != "eps") {
      throw ConfigurationError("unknown metric parameter '" + key + "'");
    }
  }
  if (id == "euclidean") return make_euclidean(n);
  if (id == "sphere") return make_sphere(n);
  if (id == "hyperbolic") return make_hyperbolic(n);
  if (id == "randers")
    return make_randers({n, AlphaKind::flat, BetaKind::rotating, get("strength", 0.3)});
  if (id == "randers_exact")
    return make_randers({n, AlphaKind::flat, BetaKind::exact, get("strength", 0.3)});
  if (id == "berwald_product") {
    if (n != 3) throw ConfigurationError("berwald_product is defined for n = 3");
    return make_berwald_product(get("b", 0.5));
  }
  if (id == "quartic_norm") return make_quartic_norm(n, get("eps", 0.1));
  if (id == "funk") return make_funk(ConvexDomain::parse(domain, n));
  if (id == "hilbert") return make_hilbert(ConvexDomain::parse(domain, n));
  std::ostringstream os;
  os << "unknown metric id '" << id << "'; catalog:";
  for (const auto& e : catalog()) os << " " << e.id;
  throw ConfigurationError(os.str());
}

std::vector<MetricPtr> zoo(int n) {
  std::vector<MetricPtr> out = {
      make_euclidean(n),
      make_sphere(n),
      make_hyperbolic(n),
      make_randers({n, AlphaKind::flat, BetaKind::rotating, 0.3}),
      make_randers({n, AlphaKind::flat, BetaKind::exact, 0.3}),
      make_quartic_norm(n, 0.1),
      make_funk(ConvexDomain::unit_ball(n)),
      make_funk(ConvexDomain::quartic(n, 0.1)),
      make_hilbert(ConvexDomain::unit_ball(n)),
      make_hilbert(ConvexDomain::quartic(n, 0.1)),
  };
  if (n == 3) out.push_back(make_berwald_product(0.5));
  return out;
}

}  // namespace finsler
