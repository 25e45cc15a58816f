#pragma once

// Chart-based Finsler metrics with jet-capable evaluators.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finsler/jet.hpp"

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

using ParamMap = std::map<std::string, double>;

class FinslerMetric {
 public:
  virtual ~FinslerMetric() = default;

  int dim() const { return n_; }
  const std::string& id() const { return id_; }
  const ParamMap& params() const { return params_; }
  std::string describe() const;
  // Claimed reversibility F(x, -y) = F(x, y).
  virtual bool reversible() const = 0;
  // True when F does not depend on the base point (a Minkowski norm).
  virtual bool x_independent() const { return false; }

  virtual bool in_domain(std::span<const double> x) const = 0;
  virtual double eval(std::span<const double> x, std::span<const double> y) const = 0;
  virtual Jet eval(std::span<const Jet> x, std::span<const Jet> y) const = 0;

  // Busemann-Hausdorff density when a closed form is known.
  virtual std::optional<double> closed_bh_density(std::span<const double>) const {
    return std::nullopt;
  }
  virtual std::optional<Jet> closed_bh_density(std::span<const Jet>) const {
    return std::nullopt;
  }

  // Maps u in [0,1]^n to a base point used for validation and property sweeps.
  virtual Vec sample_point(std::span<const double> u) const;
  // Radius of the sampling ball around the origin.
  virtual double sampling_radius() const { return 0.5; }

  double eval(const Vec& x, const Vec& y) const { return eval(as_span(x), as_span(y)); }
  bool in_domain(const Vec& x) const { return in_domain(as_span(x)); }

  // F^2 as a jet at (x, y) with the given orders.
  Jet squared_jet(const Vec& x, const Vec& y, int x_order, int y_order) const;
  // F as a jet at (x, y).
  Jet jet(const Vec& x, const Vec& y, int x_order, int y_order) const;

 protected:
  FinslerMetric(int n, std::string id, ParamMap params)
      : n_(n), id_(std::move(id)), params_(std::move(params)) {}

 private:
  int n_;
  std::string id_;
  ParamMap params_;
};

using MetricPtr = std::shared_ptr<const FinslerMetric>;

// Implements the two eval overloads from a single templated `value` member
// of Derived:  template <class T> T value(std::span<const T>, std::span<const T>) const.
// A Derived that also provides  template <class T> T bh_density(std::span<const T>) const
// gets the closed-form density overloads.
template <class Derived>
class MetricBase : public FinslerMetric {
 public:
  using FinslerMetric::eval;
  using FinslerMetric::closed_bh_density;

  double eval(std::span<const double> x, std::span<const double> y) const override {
    return self().template value<double>(x, y);
  }
  Jet eval(std::span<const Jet> x, std::span<const Jet> y) const override {
    return self().template value<Jet>(x, y);
  }
  std::optional<double> closed_bh_density(std::span<const double> x) const override {
    if constexpr (requires(const Derived& d) { d.template bh_density<double>(x); })
      return self().template bh_density<double>(x);
    else
      return std::nullopt;
  }
  std::optional<Jet> closed_bh_density(std::span<const Jet> x) const override {
    if constexpr (requires(const Derived& d) { d.template bh_density<Jet>(x); })
      return self().template bh_density<Jet>(x);
    else
      return std::nullopt;
  }

 protected:
  using FinslerMetric::FinslerMetric;

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// A point of the slit tangent bundle inside the metric's chart.
struct TangentSample {
  Vec x;
  Vec y;
};

// Validates chart membership and F(x, y) > 1e-12.
TangentSample make_sample(const FinslerMetric& metric, const Vec& x, const Vec& y);

// Deterministic validation samples: Halton points in the sampling ball and
// Halton directions on the unit sphere.
std::vector<TangentSample> halton_samples(const FinslerMetric& metric, int count,
                                          int skip = 0);

// Radical-inverse Halton coordinate (index >= 1).
double halton(int index, int base);
// Uniform point on S^{n-1} from u in [0,1]^{n-1}.
Vec sphere_point(std::span<const double> u, int n);

struct ValidationReport {
  bool ok = true;
  std::string failure;
  int samples = 0;
};

// Positivity, positive 1-homogeneity (1e-10 at lambda = 0.5, 2), positive
// definiteness of g_y and the reversibility claim (1e-10) at `count` samples.
ValidationReport check_metric(const FinslerMetric& metric, int count = 100);
// As check_metric but throws MetricValidityError naming the sample.
void validate_metric(const FinslerMetric& metric, int count = 100);

}  // namespace finsler
