#pragma once

// Geodesic coefficients, the geodesic flow, exponential map, covariant
// derivative and parallel transport.

#include <functional>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

struct SprayCoeffs {
  Vec G;  // G^i(y)
  Mat N;  // N^i_j = dG^i / dy^j
};

// Jets of G^1..G^n at (x, y) with the given orders; F^2 is lifted to
// (x_order + 1, y_order + 2) and
//   G^i = 1/4 g^il (d^2 F^2 / dx^k dy^l  y^k - dF^2 / dx^l).
std::vector<Jet> spray_jets(const FinslerMetric& metric, const Vec& x, const Vec& y,
                            int x_order, int y_order);
// Same from an F^2 jet supplied by the caller (orders drop by (1, 2)).
std::vector<Jet> spray_jets(const Jet& f2, std::span<const Jet> y_vars);

SprayCoeffs spray_coeffs(const FinslerMetric& metric, const TangentSample& s);
Vec spray_G(const FinslerMetric& metric, const Vec& x, const Vec& y);

// Solves A z = b in jet arithmetic by Gaussian elimination with partial
// pivoting on the constant terms.
std::vector<Jet> jet_solve(std::vector<std::vector<Jet>> A, std::vector<Jet> b);

struct GeodesicOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 1e-2;
  double max_step = 0.1;
  int max_steps = 200000;
  // Rescale y0 to F = 1 before integrating.
  bool unit_speed = false;
  // Interior checkpoints per accepted step for the Euler-Lagrange residual.
  int residual_checkpoints = 1;
  // Times (between 0 and t_end) the stepper lands on exactly.
  std::vector<double> stops;
};

struct PathSample {
  double t = 0.0;
  Vec x, v, a;                  // position, velocity, acceleration -2G
  std::vector<Vec> frame;       // transported vectors (may be empty)
  std::vector<Vec> frame_rate;  // -N U
};

struct GeodesicPath {
  std::vector<PathSample> samples;
  int accepted = 0;
  int rejected = 0;
  double max_el_residual = 0.0;
  bool unit_speed = false;
  bool exited = false;      // left the chart before t_end
  bool reversed = false;    // integrated backwards (flagged for positively complete metrics)
  double t_begin = 0.0;
  double t_end = 0.0;       // last time reached
  std::vector<std::size_t> stop_samples;  // sample index per reached stop, in stop order

  // Cubic Hermite dense output.
  PathSample at(double t) const;
};

// Integrates x'' = -2 G(x, x') from (x0, y0) over [0, t_end] (t_end < 0 runs
// backwards) with an adaptive Dormand-Prince 5(4) pair and PI step control.
// `frame` vectors are parallel transported along the way.  Leaving the chart
// ends the path early with `exited` set; a collapsing step size throws
// IntegrationError.
GeodesicPath integrate_geodesic(const FinslerMetric& metric, const Vec& x0, const Vec& y0,
                                double t_end, const GeodesicOptions& opts = {},
                                const std::vector<Vec>& frame = {});

// States of the geodesic from (x, y) at the given times (any order, negative
// allowed), each reached by integrating exactly to it, so no dense-output
// error enters.  Throws RangeError if a time lies beyond a chart exit.
std::vector<PathSample> geodesic_samples(const FinslerMetric& metric, const Vec& x, const Vec& y,
                                         const std::vector<double>& times,
                                         const GeodesicOptions& opts = {},
                                         const std::vector<Vec>& frame = {});

// exp_x(y) = c(1).  Throws RangeError when the geodesic leaves the chart first.
Vec exp_map(const FinslerMetric& metric, const Vec& x, const Vec& y,
            const GeodesicOptions& opts = {});

// D_y U = dU(y) + N(y) U, the derivative of U taken by the finite-difference oracle.
Vec covariant_derivative(const FinslerMetric& metric, const std::function<Vec(const Vec&)>& U,
                         const Vec& x, const Vec& y);

struct TransportResult {
  std::vector<Vec> frame_in;
  std::vector<Vec> frame_out;
  double gram_drift = 0.0;  // max deviation of g_{c'}-inner products along the way
  GeodesicPath path;
};

// Transport along the geodesic from (x, y) for time t_end.
TransportResult parallel_transport(const FinslerMetric& metric, const Vec& x, const Vec& y,
                                   double t_end, const std::vector<Vec>& frame,
                                   const GeodesicOptions& opts = {});

// Transport along an arbitrary curve t -> (c(t), c'(t)) on [t0, t1] by
// D_{c'} U = 0 (classical RK4 with `steps` steps).
using Curve = std::function<std::pair<Vec, Vec>(double)>;
TransportResult parallel_transport(const FinslerMetric& metric, const Curve& curve, double t0,
                                   double t1, const std::vector<Vec>& frame, int steps = 2000);

// g_{c'}-Gram matrix of a frame at a path sample.
Mat frame_gram(const FinslerMetric& metric, const PathSample& s);

// CSV rows "t,x1..xn,v1..vn,F" with a versioned header comment.
std::string path_csv(const FinslerMetric& metric, const GeodesicPath& path, double dt = 0.0);

}  // namespace finsler
