#include "mdrk/derivchain.hpp"

#include "mdrk/stencil.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace mdrk {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Vector ej_psi(const FluxModel& model, std::span<const Vector> z, int k) {
  const Vector& y = z[0];
  switch (k) {
    case 2:
      return model.flux_jacobian(y) * z[1];
    case 3:
      return model.second_action(y, z[1], z[1]) + model.flux_jacobian(y) * z[2];
    case 4:
      return model.third_action(y, z[1], z[1], z[1]) + 3.0 * model.second_action(y, z[1], z[2]) +
             model.flux_jacobian(y) * z[3];
    default:
      throw InvalidArgument("EJ strategy is implemented for derivative orders up to 4, got " +
                            std::to_string(k));
  }
}

Vector rec_psi(const FluxModel& model, std::span<const Vector> z, int k) {
  return model.time_deriv_jacobians[static_cast<std::size_t>(k - 2)](z[0]) * z[1];
}

Vector at_psi(const DerivStrategy& strategy, const FluxModel& model, std::span<const Vector> z,
              int k) {
  const auto& w = stencil::make_weights(k - 1, strategy.stencil_halfwidth);
  const int p = w.p;
  Vector sum = Vector::Zero(z[0].size());
  for (int j = -p; j <= p; ++j) {
    const double delta = w.weight(j);
    if (delta == 0.0) continue;
    Vector arg = z[0];
    for (int m = 1; m < k; ++m) arg += strategy.dt * std::pow(j, m) / factorial(m) * z[static_cast<std::size_t>(m)];
    sum += delta * model.flux(arg);
  }
  return sum;
}

}  // namespace

std::string_view to_string(DerivKind kind) {
  switch (kind) {
    case DerivKind::EJ: return "ej";
    case DerivKind::Rec: return "rec";
    case DerivKind::AT: return "at";
  }
  return "?";
}

DerivKind parse_deriv_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "ej") return DerivKind::EJ;
  if (lower == "rec") return DerivKind::Rec;
  if (lower == "at" || lower == "a") return DerivKind::AT;
  throw InvalidArgument("unknown derivative strategy '" + std::string(text) + "' (expected at, ej or rec)");
}

int default_halfwidth(int q, int r) {
  return std::max({q / 2, r / 2, 1});
}

void require_capabilities(const DerivStrategy& strategy, const FluxModel& model) {
  const int r = strategy.max_order;
  if (r < 1) throw InvalidArgument("derivative order must be >= 1");
  if (!model.flux) throw MissingCapability("model '" + model.name + "' has no flux");
  switch (strategy.kind) {
    case DerivKind::EJ:
      if (r > 4) throw InvalidArgument("EJ strategy is implemented for r <= 4, got r = " + std::to_string(r));
      if (r >= 2 && !model.flux_jacobian)
        throw MissingCapability("EJ strategy needs flux_jacobian of model '" + model.name + "'");
      if (r >= 3 && !model.second_action)
        throw MissingCapability("EJ strategy needs the second-derivative tensor action of model '" + model.name + "'");
      if (r >= 4 && !model.third_action)
        throw MissingCapability("EJ strategy needs the third-derivative tensor action of model '" + model.name + "'");
      break;
    case DerivKind::Rec:
      if (model.max_rec_order() < r)
        throw MissingCapability("Rec strategy needs time_deriv_jacobians up to index " + std::to_string(r - 2) +
                                " for model '" + model.name + "'");
      break;
    case DerivKind::AT:
      if (r >= 2) {
        if (strategy.stencil_halfwidth < stencil::min_halfwidth(r - 1))
          throw InvalidArgument("AT stencil half-width p = " + std::to_string(strategy.stencil_halfwidth) +
                                " is too small for r = " + std::to_string(r));
        if (!(strategy.dt > 0.0)) throw InvalidArgument("AT strategy needs a positive dt");
      }
      break;
  }
}

std::vector<Vector> derivatives_direct(const DerivStrategy& strategy, const FluxModel& model,
                                       const Vector& y) {
  if (y.size() != model.dim) throw InvalidArgument("state dimension does not match the model");
  if (strategy.kind != DerivKind::AT) return dersol_chain(strategy, model, y);

  const int r = strategy.max_order;
  std::vector<Vector> d;
  d.reserve(static_cast<std::size_t>(r));
  d.push_back(model.flux(y));
  for (int k = 2; k <= r; ++k) {
    const auto& w = stencil::make_weights(k - 1, strategy.stencil_halfwidth);
    std::vector<Vector> samples;
    samples.reserve(w.delta.size());
    for (int j = -w.p; j <= w.p; ++j) {
      Vector arg = y;
      for (int m = 1; m < k; ++m) {
        arg += std::pow(j * strategy.dt, m) / factorial(m) * d[static_cast<std::size_t>(m - 1)];
      }
      samples.push_back(model.flux(arg));
    }
    d.push_back(stencil::apply(w, samples, strategy.dt));
  }
  return d;
}

std::vector<Matrix> derivatives_direct_jacobian(const DerivStrategy& strategy,
                                                const FluxModel& model, const Vector& y) {
  const int r = strategy.max_order;
  std::vector<Matrix> jac;
  jac.reserve(static_cast<std::size_t>(r));
  if (strategy.kind != DerivKind::AT) {
    if (static_cast<int>(model.time_deriv_jacobians.size()) < r) {
      throw MissingCapability("analytic Jacobian needs time_deriv_jacobians up to index " +
                              std::to_string(r - 1) + " for model '" + model.name + "'");
    }
    for (int k = 1; k <= r; ++k) jac.push_back(model.time_deriv_jacobians[static_cast<std::size_t>(k - 1)](y));
    return jac;
  }

  if (!model.flux_jacobian) throw MissingCapability("analytic AT Jacobian needs flux_jacobian");
  const auto d = derivatives_direct(strategy, model, y);
  const auto n = y.size();
  jac.push_back(model.flux_jacobian(y));
  for (int k = 2; k <= r; ++k) {
    const auto& w = stencil::make_weights(k - 1, strategy.stencil_halfwidth);
    Matrix sum = Matrix::Zero(n, n);
    for (int j = -w.p; j <= w.p; ++j) {
      const double delta = w.weight(j);
      if (delta == 0.0) continue;
      Vector arg = y;
      Matrix darg = Matrix::Identity(n, n);
      for (int m = 1; m < k; ++m) {
        const double coeff = std::pow(j * strategy.dt, m) / factorial(m);
        arg += coeff * d[static_cast<std::size_t>(m - 1)];
        darg += coeff * jac[static_cast<std::size_t>(m - 1)];
      }
      sum += delta * model.flux_jacobian(arg) * darg;
    }
    jac.push_back(sum / std::pow(strategy.dt, k - 1));
  }
  return jac;
}

Vector psi_dersol(const DerivStrategy& strategy, const FluxModel& model,
                  std::span<const Vector> z, int k) {
  if (k < 2 || k > strategy.max_order) {
    throw InvalidArgument("psi_dersol order must lie in [2, r], got " + std::to_string(k));
  }
  if (static_cast<int>(z.size()) < k) throw InvalidArgument("psi_dersol needs z_0 .. z_{k-1}");
  switch (strategy.kind) {
    case DerivKind::EJ: return ej_psi(model, z, k);
    case DerivKind::Rec: return rec_psi(model, z, k);
    case DerivKind::AT: return at_psi(strategy, model, z, k);
  }
  return {};
}

std::vector<Matrix> psi_dersol_jacobian(const DerivStrategy& strategy, const FluxModel& model,
                                        std::span<const Vector> z, int k) {
  if (strategy.kind != DerivKind::AT) {
    throw MissingCapability("analytic DerSol Jacobian is only available for the AT strategy");
  }
  if (!model.flux_jacobian) throw MissingCapability("analytic AT Jacobian needs flux_jacobian");
  const auto& w = stencil::make_weights(k - 1, strategy.stencil_halfwidth);
  const auto n = z[0].size();
  std::vector<Matrix> parts(static_cast<std::size_t>(k), Matrix::Zero(n, n));
  for (int j = -w.p; j <= w.p; ++j) {
    const double delta = w.weight(j);
    if (delta == 0.0) continue;
    Vector arg = z[0];
    for (int m = 1; m < k; ++m) arg += strategy.dt * std::pow(j, m) / factorial(m) * z[static_cast<std::size_t>(m)];
    const Matrix jd = delta * model.flux_jacobian(arg);
    parts[0] += jd;
    for (int m = 1; m < k; ++m) parts[static_cast<std::size_t>(m)] += strategy.dt * std::pow(j, m) / factorial(m) * jd;
  }
  return parts;
}

std::vector<Vector> dersol_chain(const DerivStrategy& strategy, const FluxModel& model,
                                 const Vector& y) {
  const int r = strategy.max_order;
  std::vector<Vector> z;
  z.reserve(static_cast<std::size_t>(r + 1));
  z.push_back(y);
  z.push_back(model.flux(y));
  for (int k = 2; k <= r; ++k) z.push_back(psi_dersol(strategy, model, z, k));
  z.erase(z.begin());
  return z;
}

double dersol_weight(DerivKind kind, double dt, int k) {
  return kind == DerivKind::AT ? dt : std::pow(dt, k);
}

}  // namespace mdrk
