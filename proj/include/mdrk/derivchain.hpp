#pragma once

#include "mdrk/odesys.hpp"
#include "mdrk/types.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace mdrk {

enum class DerivKind { EJ, Rec, AT };

std::string_view to_string(DerivKind kind);
/// Accepts "ej", "rec", "at" (case-insensitive).
DerivKind parse_deriv_kind(std::string_view text);

struct DerivStrategy {
  DerivKind kind = DerivKind::AT;
  int max_order = 1;
  /// AT stencil half-width p; must be >= max_order / 2.
  int stencil_halfwidth = 1;
  /// Stencil spacing, the current step size. AT only.
  double dt = 0.0;
};

/// p = floor(q/2), raised to the smallest half-width admissible for r.
int default_halfwidth(int q, int r);

/// Throws MissingCapability naming the absent model field, or InvalidArgument
/// for unusable parameters (EJ beyond order 4, bad p or dt for AT).
void require_capabilities(const DerivStrategy& strategy, const FluxModel& model);

/// [y^(1), ..., y^(r)] at state y.
///   EJ:  Faa di Bruno expansion with tensor actions of Phi', Phi'', Phi'''.
///   Rec: y^(k) = [d^{k-2}Phi/dt^{k-2}]'(y) y^(1).
///   AT:  y~^(k) = P^(k-1) applied to Taylor-predicted flux samples.
std::vector<Vector> derivatives_direct(const DerivStrategy& strategy, const FluxModel& model,
                                       const Vector& y);

/// d y^(k) / d y for k = 1..r. EJ and Rec read the model's time-derivative
/// Jacobians (entries 0..r-1); AT differentiates its recursion using only Phi'.
std::vector<Matrix> derivatives_direct_jacobian(const DerivStrategy& strategy,
                                                const FluxModel& model, const Vector& y);

/// Psi_k(z_0, ..., z_{k-1}) for 2 <= k <= r, with z.size() >= k.
/// EJ/Rec treat z_m as the m-th derivative. AT uses the scaled convention
/// z_m ~ dt^{m-1} y~^(m) and returns the equally scaled Psi~_k.
Vector psi_dersol(const DerivStrategy& strategy, const FluxModel& model,
                  std::span<const Vector> z, int k);

/// Partial derivatives of Psi~_k with respect to z_0, ..., z_{k-1}. AT only.
std::vector<Matrix> psi_dersol_jacobian(const DerivStrategy& strategy, const FluxModel& model,
                                        std::span<const Vector> z, int k);

/// (z_1, ..., z_r) consistent with the DerSol relations at z_0 = y, in the
/// strategy's own convention (scaled for AT).
std::vector<Vector> dersol_chain(const DerivStrategy& strategy, const FluxModel& model,
                                 const Vector& y);

/// Coefficient multiplying z_k in the DerSol stage row: dt^k for EJ/Rec,
/// dt for the scaled AT unknowns.
double dersol_weight(DerivKind kind, double dt, int k);

}  // namespace mdrk
