#pragma once

// Model volumes V_{lambda,delta} and the volume / conjugate point comparisons.

#include <string>
#include <vector>

#include "finsler/measures.hpp"
#include "finsler/metric.hpp"

namespace finsler {

// Solution of s'' + lambda s = 0, s(0) = 0, s'(0) = 1.
double s_lambda(double lambda, double t);

// Vol(S^{n-1}) int_0^r [e^{-delta t} s_lambda(t)]^{n-1} dt.
struct ModelVolume {
  double lambda = 0.0;
  double delta = 0.0;
  int n = 2;

  // r <= pi / sqrt(lambda) when lambda > 0 (RangeError otherwise)
  double value(double r) const;
  double derivative(double r) const;
  double max_radius() const;  // infinity unless lambda > 0
};

double model_volume(double lambda, double delta, int n, double r);

// Sweep of Ric / F^2 >= (n-1) lambda and S / F >= (n-1) delta.
struct CurvatureBoundSweep {
  bool ok = true;
  int samples = 0;
  double min_ricci = 0.0;  // min Ric / F^2 over the sweep
  double min_s = 0.0;      // min S / F
  std::string failure;
};

// `check_s` off skips the S-curvature bound (the conjugate point bound needs Ric only).
CurvatureBoundSweep curvature_bound_sweep(const FinslerMetric& metric, double lambda,
                                          double delta, int samples = 20, bool check_s = true,
                                          double tol = 1e-6);

struct RatioRow {
  double r = 0.0;
  double volume = 0.0;
  double volume_err = 0.0;  // MC standard error or quadrature error
  double model = 0.0;
  double ratio = 0.0;
  bool flagged = false;
};

struct RatioReport {
  CurvatureBoundSweep sweep;
  bool skipped = false;  // sweep failed, nothing asserted
  std::vector<RatioRow> rows;
  bool non_increasing = true;
  double max_increase = 0.0;  // largest ratio[i+1] - ratio[i] beyond the tolerance (0 if none)
  std::string note;
};

struct RatioOptions {
  DistanceSource source = DistanceSource::geodesic_polar;
  std::string domain = "ball";
  VolumeOptions volume;
  int sweep_samples = 20;
};

// Tabulates mu(B(x, r)) / V_{lambda,delta}(r); non-increase is asserted up to
// 3 combined standard errors plus the quadrature error.
RatioReport ratio_monotonicity_check(const FinslerMetric& metric, const Vec& x, double lambda,
                                     double delta, const std::vector<double>& r_grid,
                                     const RatioOptions& opts = {});

struct ConjugatePoint {
  bool found = false;
  bool inconclusive = false;  // left the chart (or the search window) first
  double t = 0.0;             // first conjugate parameter (unit speed)
  double bound = 0.0;         // pi / sqrt(lambda)
  bool within_bound = true;   // t <= bound + 1e-3
  CurvatureBoundSweep sweep;
  std::string note;
};

// Jacobi equation J'' + K(t) J = 0 in a parallel g-orthonormal frame of c'^perp,
// K_ab = g(R_{c'} E_a, E_b); returns the first zero of det J with J(0) = 0,
// J'(0) = I.  Throws PreconditionError unless lambda > 0 passes the Ricci sweep.
ConjugatePoint conjugate_point_bound(const FinslerMetric& metric, const Vec& x, const Vec& y,
                                     double lambda, int sweep_samples = 20);

}  // namespace finsler
