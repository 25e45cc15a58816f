#pragma once

// Quantities living in a single tangent space: fundamental tensor, Cartan
// torsion and its derivative, mean Cartan torsion, distortion,
// Busemann-Hausdorff density and the geometry of the indicatrix.

#include <cstdint>
#include <optional>

#include "finsler/estimate.hpp"
#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

struct FundamentalTensor {
  Mat g;
  Mat g_inv;
  double det_g = 0.0;
};

// From a jet of F^2 with y-order >= 2 (the value is read at its expansion point).
FundamentalTensor fundamental_tensor(const Jet& f2, int n);
// g_ij = 1/2 d^2 F^2 / dy^i dy^j.  Throws MetricValidityError when g is not
// positive definite.
FundamentalTensor fundamental_tensor(const FinslerMetric& metric, const TangentSample& s);

// C_ijk = 1/4 d^3 F^2 and C~_ijkl = 1/4 d^4 F^2 (the y-derivative of C).
Tensor cartan_torsion(const FinslerMetric& metric, const TangentSample& s);
Tensor cartan_tilde(const FinslerMetric& metric, const TangentSample& s);
// I_k = g^ij C_ijk
Vec mean_cartan(const FundamentalTensor& g, const Tensor& C);

struct CartanData {
  Tensor C;
  Tensor C_tilde;
  Vec I;
  std::optional<double> tau;
};

// Everything from one (0,4) jet of F^2; tau only when a density is given.
CartanData cartan_data(const FinslerMetric& metric, const TangentSample& s,
                       std::optional<double> density = std::nullopt);

// tau = ln(sqrt(det g) / sigma)
double distortion(const FinslerMetric& metric, const TangentSample& s, double sigma);
// max over coordinate directions v of |d/dt tau(y + t v) - I_y(v)|, the
// derivative taken by the finite-difference oracle.
double distortion_derivative_check(const FinslerMetric& metric, const TangentSample& s,
                                   double sigma);

// sigma_F(x) = Vol(B^n) / Vol{F(x, .) < 1} with the body volume from
// (1/n) int_{S^{n-1}} F(x, theta)^{-n} by spherical quadrature (n = 2, 3).
double bh_density(const FinslerMetric& metric, const Vec& x);
// Same with an error estimate from a half-resolution rule.
MeasureEstimate bh_density_quadrature(const FinslerMetric& metric, const Vec& x);
// Rejection sampling of the unit body in a bounding box.
MeasureEstimate bh_density_mc(const FinslerMetric& metric, const Vec& x, long long samples,
                              std::uint64_t seed);
// Quadrature value after checking it against Monte Carlo; throws
// NumericalIntegrityError beyond 3 combined standard errors.
double bh_density_checked(const FinslerMetric& metric, const Vec& x, long long samples = 1000000,
                          std::uint64_t seed = 1);
// Density as a jet in x (x-order as given, y-order 0): the closed form when
// the metric has one, otherwise the quadrature carried out in jet arithmetic.
Jet density_jet(const FinslerMetric& metric, const Vec& x, int x_order);
// Closed form when available, else quadrature.
double density(const FinslerMetric& metric, const Vec& x);

// C_y(u, v) as a vector: the g_y-dual of C_y(u, v, .).
Vec cartan_vector(const FundamentalTensor& g, const Tensor& C, const Vec& u, const Vec& v);

// Indicatrix curvature R_y(u,v)w = C(C(u,w),v) - C(C(v,w),u) + g(v,w)u - g(u,w)v
// for a Minkowski norm, y on the indicatrix, u, v, w tangent to it.
Vec indicatrix_riemann(const FinslerMetric& norm, const Vec& y, const Vec& u, const Vec& v,
                       const Vec& w);
// Sectional curvature g(R(u,v)v, u) / (g(u,u)g(v,v) - g(u,v)^2) from the formula.
double indicatrix_sectional(const FinslerMetric& norm, const Vec& y, const Vec& u,
                            const Vec& v);

// n = 3: the indicatrix parametrized by polar/azimuth angles (s, t) through
// theta -> theta / F(theta).  The oracle returns the Gauss curvature of the
// induced metric by the Brioschi formula with finite differences.
struct IndicatrixPatch {
  Vec y;    // point on S
  Vec p_s;  // tangent d/ds
  Vec p_t;  // tangent d/dt
};
IndicatrixPatch indicatrix_patch(const FinslerMetric& norm, double s, double t);
double indicatrix_gauss_oracle(const FinslerMetric& norm, double s, double t);

// Riemannian volume of (S, g-dot) for a reversible norm, n = 2 or 3.
double santalo_volume(const FinslerMetric& norm);
// Busemann-Hausdorff length of the indicatrix curve (n = 2), report only.
double indicatrix_bh_volume(const FinslerMetric& norm);

}  // namespace finsler
