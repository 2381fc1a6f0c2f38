#pragma once

#include "mdrk/types.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace mdrk {

enum class JacobianMode { FiniteDifference, Analytic };

std::string_view to_string(JacobianMode mode);

struct NewtonConfig {
  /// Stop when ||F||_2 < 10^-n_tol.
  int n_tol = 12;
  /// Stop when ||F||_2 / ||F(Y^0)||_2 < 10^-n_tol0.
  int n_tol0 = 12;
  int max_iter = 1000;

  bool damping = true;
  double backtrack_factor = 0.5;
  double min_step_fraction = 1.0 / 1024.0;

  JacobianMode jacobian_mode = JacobianMode::FiniteDifference;
  /// Relative column perturbation; h_j = scale * (1 + |y_j|). Zero selects sqrt(machine eps).
  double fd_step_scale = 0.0;

  /// Residual growth beyond divergence_factor * max(1, ||F(Y^0)||) declares divergence.
  double divergence_factor = 1e12;

  void check() const;
};

enum class NewtonStatus { Converged, MaxIterations, Diverged, SingularJacobian, NonFinite };

std::string_view to_string(NewtonStatus status);

struct NewtonReport {
  NewtonStatus status = NewtonStatus::MaxIterations;
  bool converged = false;
  /// Number of Jacobian evaluations (linearizations) performed.
  int n_iter = 0;
  /// ||F(Y^i)||_2 at each linearization point.
  std::vector<double> residuals;
  /// cond_1(F'(Y^i)) at each linearization point.
  std::vector<double> cond1;
  double mean_cond1 = 0.0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::optional<int> divergence_iter;
  /// Residual evaluations, including those spent on Jacobian columns.
  long residual_evals = 0;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Damped Newton iteration for F(Y) = 0 with dense LU solves and exact 1-norm
/// condition numbers. Numerical failure (divergence, singular Jacobian,
/// iteration cap) is reported through NewtonReport::status; only contract
/// violations throw.
std::pair<Vector, NewtonReport> solve(const ResidualFn& residual, const JacobianFn& jacobian,
                                      const Vector& y_init, const NewtonConfig& cfg);

/// Forward-difference Jacobian, column j = [F(y + h_j e_j) - F(y)] / h_j with
/// h_j = scale * (1 + |y_j|). `f0` may carry a precomputed F(y).
Matrix fd_jacobian(const ResidualFn& residual, const Vector& y, double fd_step_scale,
                   const Vector* f0 = nullptr);

/// ||A||_1 * ||A^-1||_1 with the inverse from an LU factorization.
double cond1(const Matrix& a);

/// log10(mu_i / mu_{i-1}) for consecutive (epsilon, mu) entries ordered by
/// decreasing epsilon. Throws InvalidArgument for fewer than two entries.
std::vector<double> empirical_order_eps(const std::vector<std::pair<double, double>>& means);

}  // namespace mdrk
