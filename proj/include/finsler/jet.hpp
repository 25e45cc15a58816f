#pragma once

// Truncated multivariate Taylor arithmetic over the tangent bundle.
//
// A Jet stores the normalized Taylor coefficients  d^a_x d^b_y f / (a! b!)
// of a scalar f(x, y) at an expansion point, for every pair of multi-indices
// (a, b) with |a| <= max_x_order and |b| <= max_y_order.  Because the storage
// is indexed by multi-index rather than by ordered differentiation sequence,
// mixed partials are symmetric by construction.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

inline constexpr int kMaxDim = 4;
inline constexpr int kMaxXOrder = 2;
inline constexpr int kMaxYOrder = 5;

struct JetSpec {
  int n = 2;
  int max_x_order = 0;
  int max_y_order = 0;

  friend bool operator==(const JetSpec&, const JetSpec&) = default;
  friend auto operator<=>(const JetSpec&, const JetSpec&) = default;

  // Throws ConfigurationError when the orders or dimension are unsupported.
  void validate() const;
  int total_order() const { return max_x_order + max_y_order; }
};

// Exponent vector over one block of variables (x or y).
using MultiIndex = std::array<std::uint8_t, kMaxDim>;

struct JetLayout;

class Jet {
 public:
  Jet() = default;
  // Constant jet.
  Jet(const JetSpec& spec, double value);

  const JetSpec& spec() const;
  std::span<const double> coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return layout_ == nullptr; }

  double value() const { return coeffs_.empty() ? 0.0 : coeffs_[0]; }

  // Normalized coefficient d^a_x d^b_y f / (a! b!).
  double coeff(const MultiIndex& a, const MultiIndex& b) const;
  // Raw mixed partial d^a_x d^b_y f at the expansion point.
  double partial(const MultiIndex& a, const MultiIndex& b) const;

  // Exact derivative as a jet of one lower order in that block.
  Jet d_x(int i) const;
  Jet d_y(int i) const;

  // Drops every coefficient outside `spec` (orders must not grow).
  Jet truncate(const JetSpec& spec) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(const Jet& other);
  Jet& operator/=(const Jet& other);
  Jet& operator+=(double c);
  Jet& operator-=(double c);
  Jet& operator*=(double c);
  Jet& operator/=(double c);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double c) { return a += c; }
  friend Jet operator+(double c, Jet a) { return a += c; }
  friend Jet operator-(Jet a, double c) { return a -= c; }
  friend Jet operator-(double c, const Jet& a) { return -a + c; }
  friend Jet operator*(Jet a, double c) { return a *= c; }
  friend Jet operator*(double c, Jet a) { return a *= c; }
  friend Jet operator/(Jet a, double c) { return a /= c; }
  friend Jet operator/(double c, const Jet& a);

 private:
  friend struct JetAccess;
  Jet(std::shared_ptr<const JetLayout> layout, std::vector<double> coeffs);

  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> coeffs_;
};

// Coordinate jets for (x^1..x^n, y^1..y^n): each seeded with a unit
// first-order coefficient in its own variable.  Returns 2n jets.
std::vector<Jet> lift(std::span<const double> x, std::span<const double> y,
                      const JetSpec& spec);

// Elementary functions, exact to truncation order.
Jet sqrt(const Jet& a);
Jet log(const Jet& a);
Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet pow(const Jet& a, double p);
Jet pow(const Jet& a, const Jet& p);
Jet recip(const Jet& a);

// 0.5 (a + b + sqrt((a - b)^2 + width^2)); smooth upper envelope of max(a, b).
Jet smooth_max(const Jet& a, const Jet& b, double width);
double smooth_max(double a, double b, double width);

// Scalar-generic helpers so evaluators can be written once for double and Jet.
inline double constant_like(double, double c) { return c; }
inline Jet constant_like(const Jet& ref, double c) { return Jet(ref.spec(), c); }
inline double value_of(double v) { return v; }
inline double value_of(const Jet& j) { return j.value(); }

MultiIndex unit_index(int i);
MultiIndex make_index(std::initializer_list<int> exps);
// Multi-index from a list of variable numbers, repeats allowed: {0, 0, 2} -> (2, 0, 1).
MultiIndex index_of(std::span<const int> vars);
MultiIndex index_of(std::initializer_list<int> vars);

// Raw partial with the differentiation variables listed one by one.
double partial(const Jet& j, std::initializer_list<int> x_vars, std::initializer_list<int> y_vars);

}  // namespace finsler
