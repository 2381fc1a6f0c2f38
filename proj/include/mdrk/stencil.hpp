#pragma once

#include "mdrk/types.hpp"

#include <span>
#include <vector>

namespace mdrk::stencil {

/// Centered (2p+1)-point weights for the k-th derivative on a unit grid:
///   f^(k)(t) ~ dt^{-k} sum_{j=-p}^{p} delta[j+p] f(t + j dt),
/// accurate to order omega = 2p - 2 floor((k-1)/2).
struct StencilWeights {
  int k = 0;
  int p = 0;
  std::vector<double> delta;  // delta[j + p] for j = -p..p
  int omega = 0;

  double weight(int j) const { return delta[static_cast<std::size_t>(j + p)]; }
};

/// Smallest admissible half-width for a k-th derivative stencil.
constexpr int min_halfwidth(int k) { return (k + 1) / 2; }

/// Solves the node-power moment system
///   sum_j delta_j j^m = k! [m == k],  m = 0..2p.
/// Results are cached per (k, p). Throws InvalidArgument when k < 1 or
/// p < min_halfwidth(k).
const StencilWeights& make_weights(int k, int p);

/// dt^{-k} sum_j delta_j values[j + p]; all values must share one dimension.
Vector apply(const StencilWeights& w, std::span<const Vector> values, double dt);

}  // namespace mdrk::stencil
