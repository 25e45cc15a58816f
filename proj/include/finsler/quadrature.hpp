#pragma once

#include <functional>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

// Quadrature rule on the unit sphere S^{n-1} (n = 2 or 3).
struct SphereRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;  // sum to Vol(S^{n-1})
};

// n = 2: `angles`-point trapezoid.  n = 3: Gauss-Legendre in z (64 nodes)
// times a 128-point trapezoid in azimuth.
const SphereRule& sphere_rule(int n, int angles = 720);

double unit_ball_volume(int n);
double unit_sphere_area(int n);

// Adaptive Gauss-Kronrod integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-13, double* error = nullptr);

}  // namespace finsler
