#include "finsler/suite.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>

#include "finsler/comparison.hpp"
#include "finsler/curvature.hpp"
#include "finsler/domain.hpp"
#include "finsler/errors.hpp"
#include "finsler/measures.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/spray.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "?";
}

int SuiteReport::failures() const {
  int k = 0;
  for (const auto& c : checks) k += c.status == CheckStatus::fail;
  return k;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

using Body = std::function<std::optional<double>(CheckResult&)>;

struct Runner {
  SuiteReport& rep;
  const std::map<std::string, double>& overrides;

  void operator()(const std::string& id, const std::string& anchor, double tol,
                  const Body& body) {
    CheckResult c;
    c.id = id;
    c.anchor = anchor;
    const auto o = overrides.find(id);
    c.tolerance = o == overrides.end() ? tol : o->second;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto v = body(c);
      if (!v) {
        c.status = CheckStatus::skipped;
      } else {
        c.value = *v;
        c.status =
            (std::isfinite(*v) && *v <= c.tolerance) ? CheckStatus::pass : CheckStatus::fail;
      }
    } catch (const NumericalIntegrityError& e) {
      c.status = CheckStatus::fail;
      c.note = e.what();
      rep.integrity_error = true;
    } catch (const std::exception& e) {
      c.status = CheckStatus::fail;
      c.note = e.what();
    }
    c.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.checks.push_back(std::move(c));
  }
};

// Funk / Hilbert carry their domain in the parameter map
ConvexDomain domain_of(const FinslerMetric& m) {
  const auto it = m.params().find("domain_eps");
  return it == m.params().end() ? ConvexDomain::unit_ball(m.dim())
                                : ConvexDomain::quartic(m.dim(), it->second);
}

Vec padded(int n, std::initializer_list<double> head) {
  Vec v = Vec::Zero(n);
  int i = 0;
  for (double h : head) {
    if (i < n) v[i] = h;
    ++i;
  }
  return v;
}

double max_over(const std::vector<TangentSample>& samples,
                const std::function<double(const TangentSample&)>& f) {
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max(worst, f(s));
  return worst;
}

void constant_curvature(Runner& run, const FinslerMetric& m,
                        const std::vector<TangentSample>& samples, double kappa, double tol) {
  run("curvature.constant", "principal curvatures all equal " + num(kappa), tol,
      [&](CheckResult& c) -> std::optional<double> {
        c.note = "kappa = " + num(kappa);
        return max_over(samples, [&](const TangentSample& s) {
          double w = 0.0;
          for (double k : riemann_curvature(m, s).principal) w = std::max(w, std::abs(k - kappa));
          return w;
        });
      });
}

void structural(Runner& run, const FinslerMetric& m, const std::vector<TangentSample>& all,
                int samples) {
  run("metric.validity", "F positive, 1-homogeneous, g_y positive definite", 0.0,
      [&](CheckResult& c) -> std::optional<double> {
        const auto v = check_metric(m, samples);
        c.note = v.failure;
        return v.ok ? 0.0 : 1.0;
      });
  run("spray.homogeneity", "G(x, l y) = l^2 G(x, y)", 1e-9, [&](CheckResult&) {
    return std::optional<double>(max_over(all, [&](const TangentSample& s) {
      const Vec g1 = spray_coeffs(m, s).G;
      const Vec g2 = spray_coeffs(m, {s.x, 2.0 * s.y}).G;
      return (g2 - 4.0 * g1).norm() / (1.0 + g1.norm());
    }));
  });
  run("spray.euler", "N y = 2 G (Euler identity)", 1e-9, [&](CheckResult&) {
    return std::optional<double>(max_over(all, [&](const TangentSample& s) {
      const auto sc = spray_coeffs(m, s);
      return (sc.N * s.y - 2.0 * sc.G).norm() / (1.0 + sc.G.norm());
    }));
  });
  run("riemann.structure", "R_y(y) = 0 and R_y self-adjoint for g_y", 1e-7,
      [&](CheckResult&) {
        return std::optional<double>(max_over(all, [&](const TangentSample& s) {
          const auto r = riemann_curvature(m, s);
          return std::max(r.ry_y, r.self_adjoint_defect);
        }));
      });
  // the transport route is expensive; a quarter of the samples
  const std::vector<TangentSample> few(all.begin(),
                                       all.begin() + std::max<std::size_t>(1, all.size() / 4));
  run("landsberg.identity", "L + 1/2 g(B(., ., .), y) = 0 (L by transport)", 1e-6,
      [&](CheckResult&) {
        return std::optional<double>(max_over(few, [&](const TangentSample& s) {
          const Tensor a = landsberg_from_berwald(m, s);
          const Tensor b = landsberg_by_transport(m, s);
          return (a - b).max_abs() / (1.0 + berwald_curvature(m, s).B.max_abs());
        }));
      });
  run("s.hessian", "1/2 Hessian_y of S = E", 1e-5, [&](CheckResult&) {
    return std::optional<double>(
        max_over(few, [&](const TangentSample& s) { return es_identity_defect(m, s); }));
  });
  run("jacobi.residual", "Jacobi fields of varied geodesics solve J'' + R J = 0", 1e-5,
      [&](CheckResult& c) -> std::optional<double> {
        double worst = 0.0;
        for (const auto& s : few) {
          const Vec y = s.y / m.eval(s.x, s.y);
          Vec v = Vec::Zero(m.dim());
          v[0] = -y[1];
          v[1] = y[0];
          const auto j = jacobi_oracle(m, s.x, y, v, 0.5);
          if (!j.ok) {
            c.note = "variation broke down";
            return 1.0;
          }
          worst = std::max(worst, j.max_residual);
        }
        return worst;
      });
}

}  // namespace

SuiteReport run_verify(const FinslerMetric& m, const SuiteConfig& cfg) {
  SuiteReport rep;
  rep.metric = m.describe();
  Runner run{rep, cfg.tolerances};
  const int n = m.dim();
  const auto samples = halton_samples(m, cfg.samples);
  structural(run, m, samples, cfg.samples);
  const std::string& id = m.id();
  const double pi = std::numbers::pi;

  if (id == "funk") {
    constant_curvature(run, m, samples, -0.25, 1e-6);
    run("funk.okada", "dF/dx - F dF/dy = 0", 1e-8, [&](CheckResult&) {
      return std::optional<double>(max_over(samples, [&](const TangentSample& s) {
        return okada_residual(m, s.x, s.y).cwiseAbs().maxCoeff();
      }));
    });
    run("funk.s_curvature", "S = (n+1) F / 2", 1e-6, [&](CheckResult&) {
      return std::optional<double>(max_over(samples, [&](const TangentSample& s) {
        return std::abs(s_curvature(m, s).S - (n + 1) / 2.0 * m.eval(s.x, s.y));
      }));
    });
    run("funk.mean_berwald", "E = (n+1)/(4F^3) (F^2 g - g(y) g(y)^T)", 1e-6,
        [&](CheckResult&) {
          return std::optional<double>(max_over(samples, [&](const TangentSample& s) {
            const Mat E = berwald_curvature(m, s).E;
            const Mat g = fundamental_tensor(m, s).g;
            const double F = m.eval(s.x, s.y);
            const Vec gy = g * s.y;
            const Mat expect = (n + 1) / (4 * F * F * F) * (F * F * g - gy * gy.transpose());
            return (E - expect).cwiseAbs().maxCoeff();
          }));
        });
    run("funk.landsberg", "L + 1/2 F C = 0", 1e-6, [&](CheckResult&) {
      return std::optional<double>(max_over(samples, [&](const TangentSample& s) {
        return (landsberg_from_berwald(m, s) + cartan_torsion(m, s) * (0.5 * m.eval(s.x, s.y)))
            .max_abs();
      }));
    });
    run("funk.cartan_ode", "L' + kappa F^2 C = 0 along geodesics, kappa = -1/4", 1e-5,
        [&](CheckResult& c) -> std::optional<double> {
          std::vector<double> grid;
          for (int k = 0; k <= 12; ++k) grid.push_back(0.25 * k);
          const auto fit = constant_curvature_ode_check(m, padded(n, {0.2}),
                                                        padded(n, {-0.3, 0.8}), -0.25, grid);
          c.note = "C fit held-out error " + num(fit.c_fit_error);
          return std::max(fit.ldot_residual, fit.c_fit_error);
        });
    run("funk.model_equality",
        "V_{-1/4,(n+1)/(2(n-1))}(r) = Funk ball volume formula at 20 radii", 1e-8,
        [&](CheckResult&) {
          const double delta = (n + 1) / (2.0 * (n - 1));
          double worst = 0.0;
          for (int k = 1; k <= 20; ++k) {
            const double r = 0.25 * k;
            worst = std::max(worst, std::abs(model_volume(-0.25, delta, n, r) -
                                             funk_ball_formula(n, r)));
          }
          return std::optional<double>(worst);
        });
    run("funk.ball_volume",
        "Monte Carlo mu(B(0, 1)) within 3 sigma and 1% of the formula (value in units of the "
        "looser of the two)",
        1.0,
        [&](CheckResult& c) -> std::optional<double> {
          if (domain_of(m).kind() != ConvexDomain::Kind::unit_ball) {
            c.note = "Monte Carlo route needs the closed-form density of the ball domain";
            return std::nullopt;
          }
          VolumeOptions o;
          o.samples = cfg.mc_samples;
          o.seed = cfg.seed;
          const auto v =
              ball_volume(m, {Vec::Zero(n), 1.0, DistanceSource::funk_closed_form, "ball"}, o);
          const double expect = funk_ball_formula(n, 1.0);
          c.note = "mu = " + num(v.value) + " +- " + num(v.stderr_) +
                   ", formula " + num(expect);
          const double d = std::abs(v.value - expect);
          return std::max(d / (3.0 * v.stderr_), d / (0.01 * expect));
        });
    run("funk.projective_pair", "phi'' + kappa phi - kappa~ / phi^3 = 0 (Funk to Hilbert)",
        1e-4, [&](CheckResult&) {
          auto h = make_hilbert(domain_of(m));
          std::vector<double> grid;
          for (int k = 0; k <= 8; ++k) grid.push_back(0.25 * k);
          double worst = 0.0;
          for (const auto& s : halton_samples(m, 3)) {
            worst = std::max(worst, projective_ode_check(m, *h, -0.25, -1.0, s.x, s.y, grid));
            worst = std::max(worst, projective_ode_check(*h, m, -1.0, -0.25, s.x, s.y, grid));
          }
          return std::optional<double>(worst);
        });
  } else if (id == "hilbert") {
    constant_curvature(run, m, samples, -1.0, 1e-5);
    run("hilbert.landsberg_dot", "L' - F^2 C = 0", 1e-4, [&](CheckResult&) {
      return std::optional<double>(max_over(samples, [&](const TangentSample& s) {
        const double F = m.eval(s.x, s.y);
        return (landsberg_dot(m, s) - cartan_torsion(m, s) * (F * F)).max_abs();
      }));
    });
    run("hilbert.cartan_ode", "C(t) = a sinh t + b cosh t along geodesics, kappa = -1",
        1e-4, [&](CheckResult& c) -> std::optional<double> {
          std::vector<double> grid;
          for (int k = 0; k <= 15; ++k) grid.push_back(0.1 * k);
          const auto fit = constant_curvature_ode_check(m, padded(n, {0.1, -0.1}),
                                                        padded(n, {0.6, 0.3}), -1.0, grid);
          c.note = "scale " + num(fit.scale);
          return std::max(fit.c_fit_error, fit.ldot_residual) / std::max(1.0, fit.scale);
        });
  } else if (id == "sphere") {
    constant_curvature(run, m, samples, 1.0, 1e-6);
    run("sphere.conjugate_point", "first conjugate point at pi", 1e-3,
        [&](CheckResult& c) -> std::optional<double> {
          const auto cp = conjugate_point_bound(m, padded(n, {0.5}), padded(n, {0.0, 1.0}), 1.0, 5);
          c.note = cp.note;
          if (!cp.found) return 1.0;
          return std::abs(cp.t - pi);
        });
  } else if (id == "hyperbolic") {
    constant_curvature(run, m, samples, -1.0, 1e-6);
  } else if (id == "berwald_product") {
    run("berwald.B", "B = 0", 1e-8, [&](CheckResult&) {
      return std::optional<double>(max_over(
          samples, [&](const TangentSample& s) { return berwald_curvature(m, s).B.max_abs(); }));
    });
    run("berwald.L", "L = 0", 1e-7, [&](CheckResult&) {
      return std::optional<double>(max_over(
          samples, [&](const TangentSample& s) { return landsberg_from_berwald(m, s).max_abs(); }));
    });
    run("berwald.S", "S = 0 for the Busemann-Hausdorff measure", 1e-6, [&](CheckResult&) {
      return std::optional<double>(max_over(
          samples, [&](const TangentSample& s) { return std::abs(s_curvature(m, s).S); }));
    });
    run("berwald.transport", "parallel transport preserves F", 1e-6, [&](CheckResult&) {
      double worst = 0.0;
      for (const auto& s : halton_samples(m, 5)) {
        const Vec y = s.y / m.eval(s.x, s.y);
        std::vector<Vec> frame{padded(n, {1.0, 0.2, -0.4}), padded(n, {0.0, 1.0, 0.5})};
        const auto tr = parallel_transport(m, s.x, y, 0.5, frame);
        const Vec xe = tr.path.samples.back().x;
        for (std::size_t k = 0; k < frame.size(); ++k)
          worst = std::max(worst, std::abs(m.eval(xe, tr.frame_out[k]) - m.eval(s.x, frame[k])));
      }
      return std::optional<double>(worst);
    });
  } else if (id == "euclidean" || id == "quartic_norm") {
    constant_curvature(run, m, samples, 0.0, 1e-10);
    const double round = unit_sphere_area(n);
    if (id == "euclidean") {
      run("santalo.round", "Riemannian volume of the indicatrix = Vol(S^{n-1})", 1e-5,
          [&](CheckResult&) { return std::optional<double>(std::abs(santalo_volume(m) - round)); });
    } else {
      run("santalo.strict", "indicatrix volume below Vol(S^{n-1}) by more than 1e-4", 0.0,
          [&](CheckResult& c) {
            const double v = santalo_volume(m);
            c.note = "volume " + num(v);
            return std::optional<double>(v - (round - 1e-4));
          });
    }
    if (n == 3) {
      run("indicatrix.gauss", "indicatrix sectional curvature formula = Gauss curvature",
          1e-4, [&](CheckResult&) {
            double worst = 0.0;
            for (int k = 0; k < 10; ++k) {
              const double s = 0.3 + 0.25 * k, t = 0.2 + 0.55 * k;
              const auto p = indicatrix_patch(m, s, t);
              const double f = indicatrix_sectional(m, p.y, p.p_s, p.p_t);
              const double o = indicatrix_gauss_oracle(m, s, t);
              worst = std::max(worst, std::abs(f - o) / std::abs(o));
            }
            return std::optional<double>(worst);
          });
    }
  }
  return rep;
}

}  // namespace finsler
