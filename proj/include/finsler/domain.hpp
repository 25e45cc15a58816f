#pragma once

// Strongly convex bounded domains and the Funk/Hilbert constructions on them.

#include <span>
#include <string>

#include "finsler/jet.hpp"
#include "finsler/metric.hpp"

namespace finsler {

// Omega = { z : phi(z) < 0 } with phi(z) = |z|^2 + eps * sum z_i^4 - 1.
// eps = 0 is the unit ball.
class ConvexDomain {
 public:
  enum class Kind { unit_ball, quartic_perturbed };

  static ConvexDomain unit_ball(int n);
  static ConvexDomain quartic(int n, double eps);
  // "ball" or "quartic:<eps>".
  static ConvexDomain parse(const std::string& text, int n);

  int dim() const { return n_; }
  Kind kind() const { return kind_; }
  double eps() const { return eps_; }
  std::string describe() const;

  template <class T>
  T phi(std::span<const T> z) const {
    T r2 = z[0] * z[0];
    T q = r2 * r2;
    for (std::size_t i = 1; i < z.size(); ++i) {
      const T zi2 = z[i] * z[i];
      r2 += zi2;
      q += zi2 * zi2;
    }
    return r2 + eps_ * q - 1.0;
  }

  // d phi / d z_i
  template <class T>
  T dphi(std::span<const T> z, std::size_t i) const {
    return 2.0 * z[i] + 4.0 * eps_ * z[i] * z[i] * z[i];
  }

  bool contains(std::span<const double> x) const { return phi(x) < 0.0; }
  bool contains(const Vec& x) const { return contains(as_span(x)); }

  // Smallest t > 0 with phi(x + t v) = 0 (safeguarded Newton/bisection).
  // Throws GeometryError if the ray never exits.
  double exit_parameter(std::span<const double> x, std::span<const double> v) const;

  // Euclidean volume of Omega by spherical quadrature of the radial function.
  double volume() const;

 private:
  ConvexDomain(int n, Kind kind, double eps);
  int n_;
  Kind kind_;
  double eps_;
};

// Closed-form Funk metric of the unit ball:
// F = (sqrt(<x,y>^2 + |y|^2 (1 - |x|^2)) + <x,y>) / (1 - |x|^2).
template <class T>
T funk_unit_ball(std::span<const T> x, std::span<const T> y) {
  T xy = x[0] * y[0];
  T xx = x[0] * x[0];
  T yy = y[0] * y[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  using std::sqrt;
  const T one_minus = 1.0 - xx;
  return (sqrt(xy * xy + yy * one_minus) + xy) / one_minus;
}

double funk_unit_ball(const Vec& x, const Vec& y);

// Funk metric of a general domain: F = 1/t with phi(x + t y) = 0.  The jet
// version runs Newton's iteration in jet arithmetic from the scalar root, so
// every Taylor coefficient satisfies the implicit equation.
double funk_general(const ConvexDomain& domain, std::span<const double> x,
                    std::span<const double> y);
Jet funk_general(const ConvexDomain& domain, std::span<const Jet> x, std::span<const Jet> y);
double funk_general(const ConvexDomain& domain, const Vec& x, const Vec& y);

// F_h(x, y) = (F_f(x, y) + F_f(x, -y)) / 2.
double hilbert_general(const ConvexDomain& domain, const Vec& x, const Vec& y);

// d_f(p, q) = ln(|z - p| / |z - q|) with z the exit point of the ray p -> q.
double funk_distance(const ConvexDomain& domain, const Vec& p, const Vec& q);
double hilbert_distance(const ConvexDomain& domain, const Vec& p, const Vec& q);

}  // namespace finsler
