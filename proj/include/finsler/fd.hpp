#pragma once

// Finite-difference oracle used to cross-check the jet engine.

#include <functional>
#include <span>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

struct FdScheme {
  // Base step for first derivatives; scaled by coordinate magnitude and
  // widened for higher orders (see fd_oracle).
  double step = 1e-3;
  int richardson_levels = 3;
};

struct FdResult {
  double value = 0.0;
  double error = 0.0;  // |difference| of the last two extrapolants
  bool ok = false;     // false when the stencil hit a non-finite value
};

using ScalarField = std::function<double(std::span<const double>)>;

// Mixed partial d^orders f at `point` (orders[i] <= 4 per variable) by a
// tensor-product central-difference stencil, Richardson-extrapolated over
// steps 2^levels h, ..., 2h, h.  The nominal finest step is
// h = step * 10^((|orders| - 1) / 2) * max(1, |point_i|); h/4 .. 4h are all
// tried in half-octaves and the most self-consistent result wins.
FdResult fd_oracle(const ScalarField& f, std::span<const double> point,
                   std::span<const int> orders, const FdScheme& scheme = {});

// Convenience form for a function of (x, y) with block multi-indices.
FdResult fd_oracle(const std::function<double(std::span<const double>,
                                              std::span<const double>)>& f,
                   std::span<const double> x, std::span<const double> y,
                   const MultiIndex& a, const MultiIndex& b,
                   const FdScheme& scheme = {});

}  // namespace finsler
