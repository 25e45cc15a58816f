#include "finsler/fd.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace finsler {

namespace {

// Second-order accurate central stencils: offsets are -m..m, weights for
// the k-th derivative at unit step.
const std::vector<double>& stencil(int k) {
  static const std::vector<std::vector<double>> table = {
      {1.0},
      {-0.5, 0.0, 0.5},
      {1.0, -2.0, 1.0},
      {-0.5, 1.0, 0.0, -1.0, 0.5},
      {1.0, -4.0, 6.0, -4.0, 1.0},
  };
  if (k < 0 || k > 4) throw ConfigurationError("fd_oracle supports per-variable orders 0..4");
  return table[static_cast<std::size_t>(k)];
}

struct Estimate {
  double value;
  bool ok;
};

Estimate apply_stencil(const ScalarField& f, std::span<const double> point,
                       std::span<const int> orders, std::span<const double> steps) {
  const std::size_t m = point.size();
  std::vector<int> active;
  for (std::size_t i = 0; i < m; ++i)
    if (orders[i] > 0) active.push_back(static_cast<int>(i));

  std::vector<double> p(point.begin(), point.end());
  std::vector<std::size_t> cursor(active.size(), 0);
  double sum = 0.0;
  bool ok = true;
  while (true) {
    double w = 1.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const int v = active[a];
      const auto& st = stencil(orders[v]);
      const int half = static_cast<int>(st.size() / 2);
      w *= st[cursor[a]];
      p[v] = point[v] + (static_cast<int>(cursor[a]) - half) * steps[v];
    }
    if (w != 0.0) {
      double fv;
      try {
        fv = f(p);
      } catch (const Error&) {
        // e.g. the stencil left the chart
        fv = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(fv)) ok = false;
      sum += w * fv;
    }
    std::size_t a = 0;
    for (; a < active.size(); ++a) {
      if (++cursor[a] < stencil(orders[active[a]]).size()) break;
      cursor[a] = 0;
    }
    if (a == active.size()) break;
  }
  double scale = 1.0;
  for (int v : active) scale *= std::pow(steps[v], orders[v]);
  return {sum / scale, ok};
}

}  // namespace

FdResult fd_oracle(const ScalarField& f, std::span<const double> point,
                   std::span<const int> orders, const FdScheme& scheme) {
  if (orders.size() != point.size())
    throw ConfigurationError("fd_oracle: orders and point differ in length");
  if (!(scheme.step > 0.0)) throw ConfigurationError("fd_oracle: step must be positive");
  if (scheme.richardson_levels < 1 || scheme.richardson_levels > 3)
    throw ConfigurationError("fd_oracle: richardson_levels must be in 1..3");
  const int total = std::accumulate(orders.begin(), orders.end(), 0);
  if (total == 0) {
    const double v = f(point);
    return {v, 0.0, std::isfinite(v)};
  }
  const double widen = std::pow(10.0, (total - 1) / 2.0);
  const int levels = scheme.richardson_levels;

  auto extrapolate = [&](double finest) {
    std::vector<std::vector<double>> table(levels + 1);
    bool ok = true;
    for (int l = 0; l <= levels; ++l) {
      std::vector<double> steps(point.size());
      for (std::size_t i = 0; i < point.size(); ++i)
        steps[i] = finest * std::max(1.0, std::abs(point[i])) * std::pow(2.0, levels - l);
      auto e = apply_stencil(f, point, orders, steps);
      ok = ok && e.ok;
      table[l].push_back(e.value);
      // Error expansion is even in h: eliminate h^2, h^4, ... in turn.
      for (int k = 1; k <= l; ++k) {
        const double r = std::pow(4.0, k);
        table[l].push_back((r * table[l][k - 1] - table[l - 1][k - 1]) / (r - 1.0));
      }
    }
    FdResult out;
    out.value = table[levels][levels];
    // Both the previous row and the previous column must agree; either alone
    // can vanish by accident.
    out.error = std::max(std::abs(table[levels][levels] - table[levels - 1][levels - 1]),
                         std::abs(table[levels][levels] - table[levels][levels - 1]));
    out.ok = ok && std::isfinite(out.value) && std::isfinite(out.error);
    return out;
  };

  // Truncation and roundoff trade off differently per function, so scan
  // finest steps h/4 .. 4h in half-octaves.  A candidate's error is also
  // charged its disagreement with the next wider one, which stops an
  // accidental cancellation in the roundoff regime from winning.
  std::vector<FdResult> scan;
  for (int s = -4; s <= 4; ++s)
    scan.push_back(extrapolate(scheme.step * widen * std::pow(2.0, 0.5 * s)));
  FdResult best = scan.back();
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < scan.size(); ++k) {
    if (!scan[k].ok || !scan[k + 1].ok) continue;
    const double err = std::max(scan[k].error, std::abs(scan[k].value - scan[k + 1].value));
    if (err < best_err) {
      best_err = err;
      best = scan[k];
      best.error = err;
    }
  }
  return best;
}

FdResult fd_oracle(const std::function<double(std::span<const double>,
                                              std::span<const double>)>& f,
                   std::span<const double> x, std::span<const double> y,
                   const MultiIndex& a, const MultiIndex& b, const FdScheme& scheme) {
  const std::size_t n = x.size();
  std::vector<double> point(x.begin(), x.end());
  point.insert(point.end(), y.begin(), y.end());
  std::vector<int> orders(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    orders[i] = a[i];
    orders[n + i] = b[i];
  }
  auto g = [&](std::span<const double> p) {
    return f(p.subspan(0, n), p.subspan(n, n));
  };
  return fd_oracle(g, point, orders, scheme);
}

}  // namespace finsler
