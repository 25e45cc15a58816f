#pragma once

// Non-Riemannian curvatures (Berwald, Landsberg, S) and the Riemann
// curvature, plus numerical checks of the constant-curvature equations.

#include <functional>
#include <optional>
#include <vector>

#include "finsler/metric.hpp"
#include "finsler/spray.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

struct BerwaldTensor {
  Tensor B;  // B(i, j, k, l) = d^3 G^i / dy^j dy^k dy^l
  Mat E;     // E_jk = 1/2 sum_i B(i, i, j, k)
};

BerwaldTensor berwald_curvature(const FinslerMetric& metric, const TangentSample& s);
// B_y(u, v, w) as a vector.
Vec berwald_apply(const Tensor& B, const Vec& u, const Vec& v, const Vec& w);

// L_y(u, v, w) = -1/2 g_y(B_y(u, v, w), y), coefficients on the coordinate basis.
Tensor landsberg_from_berwald(const FinslerMetric& metric, const TangentSample& s);
// d/dt C_{c'(t)}(U, V, W) at t = 0 with the coordinate basis transported
// along the geodesic.  `dt` is the unit-speed stencil step.
Tensor landsberg_by_transport(const FinslerMetric& metric, const TangentSample& s,
                              double dt = 1e-2);
// d/dt L_{c'(t)}(U, V, W) at t = 0.
Tensor landsberg_dot(const FinslerMetric& metric, const TangentSample& s, double dt = 1e-2);
// L~_y(u, v, w, z) = d/dt L_{y + t z}(u, v, w), by differencing in y.
Tensor landsberg_tilde(const FinslerMetric& metric, const TangentSample& s);
// J_k = g^ij L_ijk
Vec mean_landsberg(const FinslerMetric& metric, const TangentSample& s);
// J_y(u) = d/dt I_{c'(t)}(U(t)) at t = 0.
Vec mean_landsberg_by_transport(const FinslerMetric& metric, const TangentSample& s,
                                double dt = 1e-2);

struct LandsbergTensor {
  Tensor L;
  Tensor L_dot;
  Tensor L_tilde;
  Vec J;
};
LandsbergTensor landsberg_curvature(const FinslerMetric& metric, const TangentSample& s);

// A density sigma(x) with its gradient.  The default is the
// Busemann-Hausdorff density of the metric.
struct DensityField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};
DensityField bh_density_field(const FinslerMetric& metric);

struct SData {
  double S = 0.0;
  double S_dot = 0.0;
};

// S and S' by differencing tau(c'(t)) along the geodesic.
SData s_curvature(const FinslerMetric& metric, const TangentSample& s,
                  const std::optional<DensityField>& field = std::nullopt, double dt = 1e-2);
// S = y^k d tau / dx^k - 2 G^k d tau / dy^k from jets; sigma and grad sigma
// at x given by the caller.
double s_curvature_jet(const FinslerMetric& metric, const TangentSample& s, double sigma,
                       const Vec& grad_sigma);
// max over the coordinate pairs of |1/2 d^2 S(y + a e_i + b e_j)/da db - E_y(e_i, e_j)|,
// the Hessian taken by the finite-difference oracle on the jet S.
double es_identity_defect(const FinslerMetric& metric, const TangentSample& s,
                          const std::optional<DensityField>& field = std::nullopt);

struct CurvatureReport {
  Mat R;                           // R^i_k
  std::vector<double> principal;   // eigenvalues of R_y on W_y divided by F^2, ascending
  double ricci = 0.0;              // trace of R_y
  std::optional<double> flag_constant;  // common value when all principal curvatures agree
  double ry_y = 0.0;               // |R_y(y)| / (F^2 |y|)
  double self_adjoint_defect = 0.0;
};

// R^i_k = 2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k + 2 G^j d^2G^i/dy^j dy^k - N^i_j N^j_k
Mat riemann_matrix(const FinslerMetric& metric, const TangentSample& s);
CurvatureReport riemann_curvature(const FinslerMetric& metric, const TangentSample& s);
// Flag curvature K(y, u) = g_y(R_y u, u) / (F^2 g_y(u, u) - g_y(y, u)^2).
double flag_curvature(const FinslerMetric& metric, const TangentSample& s, const Vec& u);

struct JacobiResult {
  std::vector<double> t;
  std::vector<Vec> J;        // J(t) = d/ds exp_x(t (y + s v)) at s = 0
  std::vector<Vec> residual; // D D J + R(J)
  double max_residual = 0.0;
  bool ok = true;            // false when the variation step broke down
};

// Jacobi fields from central differences of varied geodesics and the
// residual of the Jacobi equation against the spray-formula R.
JacobiResult jacobi_oracle(const FinslerMetric& metric, const Vec& x, const Vec& y,
                           const Vec& v, double t_end, int points = 21);

struct CurvatureOdeFit {
  double kappa = 0.0;
  std::vector<double> t;
  std::vector<double> C;          // C_{c'}(V, V, V)
  std::vector<double> C_tilde;    // C~_{c'}(V, V, V, W), V, W orthogonal to c'
  double c_fit_error = 0.0;       // max held-out error of the closed form for C
  double c_tilde_fit_error = 0.0; // same for C~
  double l_vs_dc = 0.0;           // max |L(t) - C'(t)| on interior points
  double ldot_residual = 0.0;     // |L' + kappa F^2 C| at t = 0, max over the basis
  double scale = 0.0;             // max |C| on the grid
};

// C(t) along the unit-speed geodesic from (x, y) with a parallel V, fit by
// the kappa closed form on the first third of t_grid and validated on the rest.
CurvatureOdeFit constant_curvature_ode_check(const FinslerMetric& metric, const Vec& x,
                                             const Vec& y, double kappa,
                                             const std::vector<double>& t_grid);
// Closed-form basis for C'' + kappa C = 0 (two functions) and for C~ (three).
std::vector<double> c_basis(double kappa, double t);
std::vector<double> c_tilde_basis(double kappa, double t);

// max over t_grid of |phi'' + kappa phi - kappa~ / phi^3| with
// phi = G(c')^(-1/2) along the unit-speed F-geodesic from (x, y).
double projective_ode_check(const FinslerMetric& F, const FinslerMetric& G, double kappa,
                            double kappa_tilde, const Vec& x, const Vec& y,
                            const std::vector<double>& t_grid);

// First derivative (order 1) or second derivative (order 2) at 0 of a
// vector-valued f by the five-point central stencil with one Richardson pass.
std::vector<double> five_point(const std::function<std::vector<double>(double)>& f, double h,
                               int order);

}  // namespace finsler
