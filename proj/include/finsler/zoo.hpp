#pragma once

// Built-in Finsler metrics.

#include <string>
#include <vector>

#include "finsler/domain.hpp"
#include "finsler/metric.hpp"

namespace finsler {

// Riemannian part of a Randers metric; every built-in alpha is diagonal.
enum class AlphaKind {
  flat,              // |y|^2
  sphere,            // 4 |y|^2 / (1 + |x|^2)^2, curvature +1
  hyperbolic,        // 4 |y|^2 / (1 - |x|^2)^2 on |x| < 1, curvature -1
  hyperbolic_line,   // n = 3: hyperbolic plane in (x1, x2) times a line in x3
};

enum class BetaKind {
  zero,
  constant,   // b = strength * e_last
  rotating,   // b = strength (cos x2, sin x2, 0, ...): not closed
  exact,      // b = grad(strength (x1 + 0.3 x1 x2)): closed
};

struct RandersData {
  int n = 2;
  AlphaKind alpha = AlphaKind::flat;
  BetaKind beta = BetaKind::zero;
  double strength = 0.0;
};

// F = alpha + beta.  Construction validates ||beta||_alpha < 1 and (F2) at
// 100 Halton samples.
MetricPtr make_randers(const RandersData& data);

MetricPtr make_euclidean(int n);
MetricPtr make_sphere(int n);
MetricPtr make_hyperbolic(int n);
// Hyperbolic plane times a line with beta = b dx3: parallel beta, so Berwald.
MetricPtr make_berwald_product(double b = 0.5);
// F = (|y|^4 + eps sum y_i^4)^(1/4).
MetricPtr make_quartic_norm(int n, double eps = 0.1);
MetricPtr make_funk(const ConvexDomain& domain);
MetricPtr make_hilbert(const ConvexDomain& domain);

// Okada residual dF/dx^i - F dF/dy^i.
Vec okada_residual(const FinslerMetric& metric, const Vec& x, const Vec& y);

struct CatalogEntry {
  std::string id;
  std::string summary;
};

const std::vector<CatalogEntry>& catalog();

// Construct by catalog id.  Recognized params: "strength" (randers,
// randers_exact), "b" (berwald_product), "eps" (quartic_norm).  `domain` is
// used by funk and hilbert ("ball" or "quartic:<eps>").
MetricPtr make_metric(const std::string& id, int n, const ParamMap& params = {},
                      const std::string& domain = "ball");

// Every catalog metric in dimension n (berwald_product always has n = 3).
std::vector<MetricPtr> zoo(int n);

}  // namespace finsler
