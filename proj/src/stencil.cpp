#include "mdrk/stencil.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace mdrk::stencil {
namespace {

StencilWeights compute(int k, int p) {
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const int n = 2 * p + 1;
  LongMatrix powers(n, n);
  for (int m = 0; m < n; ++m) {
    for (int j = -p; j <= p; ++j) {
      powers(m, j + p) = std::pow(static_cast<long double>(j), m);
    }
  }
  powers(0, p) = 1.0L;  // 0^0

  long double factorial = 1.0L;
  for (int i = 2; i <= k; ++i) factorial *= i;
  LongVector rhs = LongVector::Zero(n);
  rhs(k) = factorial;

  const LongVector delta = powers.fullPivLu().solve(rhs);

  StencilWeights w;
  w.k = k;
  w.p = p;
  w.omega = 2 * p - 2 * ((k - 1) / 2);
  w.delta.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w.delta[static_cast<std::size_t>(i)] = static_cast<double>(delta(i));
  // Restore the exact (anti)symmetry the moment system implies.
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  for (int j = 1; j <= p; ++j) {
    const double avg = 0.5 * (w.weight(j) + sign * w.weight(-j));
    w.delta[static_cast<std::size_t>(p + j)] = avg;
    w.delta[static_cast<std::size_t>(p - j)] = sign * avg;
  }
  if (k % 2 == 1) w.delta[static_cast<std::size_t>(p)] = 0.0;
  return w;
}

}  // namespace

const StencilWeights& make_weights(int k, int p) {
  if (k < 1) throw InvalidArgument("stencil derivative order must be >= 1, got " + std::to_string(k));
  if (p < min_halfwidth(k)) {
    throw InvalidArgument("stencil half-width p = " + std::to_string(p) + " is below the minimum " +
                          std::to_string(min_halfwidth(k)) + " for derivative order " +
                          std::to_string(k));
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<StencilWeights>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{k, p}];
  if (!slot) slot = std::make_unique<StencilWeights>(compute(k, p));
  return *slot;
}

Vector apply(const StencilWeights& w, std::span<const Vector> values, double dt) {
  const auto expected = static_cast<std::size_t>(2 * w.p + 1);
  if (values.size() != expected) {
    throw InvalidArgument("stencil expects " + std::to_string(expected) + " samples, got " +
                          std::to_string(values.size()));
  }
  if (!(dt > 0.0)) throw InvalidArgument("stencil spacing must be positive");
  const auto dim = values.front().size();
  Vector sum = Vector::Zero(dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != dim) throw InvalidArgument("stencil samples differ in dimension");
    sum += w.delta[i] * values[i];
  }
  return sum / std::pow(dt, w.k);
}

}  // namespace mdrk::stencil
