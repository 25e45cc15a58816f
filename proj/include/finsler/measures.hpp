#pragma once

// Busemann-Hausdorff volumes of regions and metric balls.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "finsler/estimate.hpp"
#include "finsler/metric.hpp"

namespace finsler {

// Monte Carlo estimate of the integral of sigma_F over {indicator} inside the
// box [lo, hi].  Zero acceptance gives value 0 with the flag set.
MeasureEstimate bh_volume(const FinslerMetric& metric,
                          const std::function<bool(const Vec&)>& indicator, const Vec& lo,
                          const Vec& hi, long long samples = 1000000, std::uint64_t seed = 1);

enum class DistanceSource { funk_closed_form, hilbert_closed_form, geodesic_polar };
std::string to_string(DistanceSource s);
DistanceSource parse_distance_source(const std::string& s);

// Forward ball B(x, r) = { z : d(x, z) < r }.
struct BallSpec {
  Vec center;
  double radius = 1.0;
  DistanceSource source = DistanceSource::geodesic_polar;
  std::string domain = "ball";  // convex domain for the closed-form distances
};

struct VolumeOptions {
  long long samples = 1000000;  // Monte Carlo, split evenly over radial shells
  std::uint64_t seed = 1;
  int shells = 50;
  int angles = 720;             // polar route, n = 2 trapezoid
  int polar_z = 16;             // polar route, n = 3: Gauss-Legendre nodes in z (8 or 16)
};

// Monte Carlo with the closed-form distance as indicator, or the polar
// quadrature of sigma |det d exp| over [0, r] x S^{n-1} (flagged as a lower
// bound when a radial geodesic meets a conjugate point or leaves the chart).
MeasureEstimate ball_volume(const FinslerMetric& metric, const BallSpec& ball,
                            const VolumeOptions& opts = {});

// nu_F(S(x, r)): the r-derivative of the polar ball volume, i.e. the
// angular integral of the polar integrand at t = r.
double sphere_area(const FinslerMetric& metric, const Vec& x, double r,
                   const VolumeOptions& opts = {});

// n 2^n Vol(B^n) int_0^{r/2} e^{-(n+1)t} sinh^{n-1}(t) dt; r may be infinite.
double funk_ball_formula(int n, double r);

struct SmallBallReport {
  std::vector<double> eps;
  std::vector<double> q;   // mu(B(x, eps)) / (Vol(B^n) eps^n)
  double c2 = 0.0;         // fit q = 1 + c2 eps^2 + c3 eps^3
  double c3 = 0.0;
  double r_x = 0.0;        // the r(x) integral
  double c2_from_r = 0.0;  // -r(x) / (6 (n + 2))
  bool reversible = true;
};

// The expansion is stated for reversible metrics; pass require_reversible =
// false to fit the coefficient anyway.
SmallBallReport small_ball_probe(const FinslerMetric& metric, const Vec& x,
                                 const std::vector<double>& eps_grid,
                                 const VolumeOptions& opts = {}, bool require_reversible = true);

// r(x) = (n+2) / (n Vol(B^n)) int_{B_x} { Ric + 3n (S' - S^2) } dmu_x with the
// Busemann-Hausdorff measure, by quadrature over directions.
double small_ball_r(const FinslerMetric& metric, const Vec& x, int angles = 64);

}  // namespace finsler
