#include "finsler/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace finsler {

namespace {

SphereRule make_rule(int n, int angles) {
  SphereRule rule;
  const double pi = std::numbers::pi;
  if (n == 2) {
    for (int k = 0; k < angles; ++k) {
      const double a = 2.0 * pi * k / angles;
      Vec p(2);
      p << std::cos(a), std::sin(a);
      rule.nodes.push_back(p);
      rule.weights.push_back(2.0 * pi / angles);
    }
  } else if (n == 3) {
    using Gauss = boost::math::quadrature::gauss<double, 64>;
    const auto& abs = Gauss::abscissa();
    const auto& w = Gauss::weights();
    const int azimuths = 128;
    std::vector<std::pair<double, double>> zs;  // (z, weight) on [-1, 1]
    for (std::size_t i = 0; i < abs.size(); ++i) {
      zs.emplace_back(abs[i], w[i]);
      if (abs[i] != 0.0) zs.emplace_back(-abs[i], w[i]);
    }
    for (const auto& [z, wz] : zs) {
      const double s = std::sqrt(1.0 - z * z);
      for (int k = 0; k < azimuths; ++k) {
        const double a = 2.0 * pi * k / azimuths;
        Vec p(3);
        p << s * std::cos(a), s * std::sin(a), z;
        rule.nodes.push_back(p);
        rule.weights.push_back(wz * 2.0 * pi / azimuths);
      }
    }
  } else {
    throw ConfigurationError("spherical quadrature is implemented for n = 2 and n = 3");
  }
  return rule;
}

}  // namespace

const SphereRule& sphere_rule(int n, int angles) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, SphereRule> cache;
  std::lock_guard lock(mu);
  const auto key = std::make_pair(n, n == 2 ? angles : 0);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_rule(n, angles)).first;
  return it->second;
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, n / 2.0) / boost::math::tgamma(n / 2.0 + 1.0);
}

double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 double* error) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, tol, &err);
  if (error) *error = err;
  return v;
}

}  // namespace finsler
