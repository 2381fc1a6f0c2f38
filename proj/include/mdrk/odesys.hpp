#pragma once

#include "mdrk/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mdrk {

using FluxFn = std::function<Vector(const Vector&)>;
using MatrixFn = std::function<Matrix(const Vector&)>;
/// Tensor action Phi''(y) . [u | v], state valued.
using SecondActionFn = std::function<Vector(const Vector& y, const Vector& u, const Vector& v)>;
/// Tensor action Phi'''(y) . [u | v | w], state valued.
using ThirdActionFn =
    std::function<Vector(const Vector& y, const Vector& u, const Vector& v, const Vector& w)>;

/// Where a model's definition comes from. `Derived` models use standard
/// textbook data and are kept out of comparisons with published values.
enum class Provenance { Published, Derived };

/// An autonomous ODE y' = Phi(y) with stiffness parameter epsilon.
///
/// Operator fields are optional and gate the derivative strategies:
///  * EJ needs flux_jacobian (r >= 2), second_action (r >= 3), third_action (r = 4).
///  * Rec needs time_deriv_jacobians[m] = [d^m Phi / dt^m]'(y) for m <= r - 2.
///  * AT needs only the flux.
/// All function fields must be pure.
struct FluxModel {
  std::string name;
  int dim = 0;
  double epsilon = 1.0;
  Provenance provenance = Provenance::Published;

  FluxFn flux;
  MatrixFn flux_jacobian;
  SecondActionFn second_action;
  ThirdActionFn third_action;
  /// Entry m is [d^m Phi/dt^m]'; entry 0 coincides with flux_jacobian.
  std::vector<MatrixFn> time_deriv_jacobians;

  std::function<Vector(double t)> reference;
  Vector y0;
  double t_end = 1.0;

  bool has_reference() const { return static_cast<bool>(reference); }
  /// Highest derivative order the EJ strategy can produce with this model.
  int max_ej_order() const;
  /// Highest derivative order the Rec strategy can produce with this model.
  int max_rec_order() const;
};

/// Scalar g(u, v) with partial derivatives. First partials are required;
/// second and third partials enable the EJ strategy up to r = 3 and r = 4.
struct ScalarField2 {
  std::function<double(double, double)> value;
  /// (g_u, g_v)
  std::function<Eigen::Vector2d(double, double)> gradient;
  /// (g_uu, g_uv, g_vv)
  std::function<Eigen::Vector3d(double, double)> hessian;
  /// (g_uuu, g_uuv, g_uvv, g_vvv)
  std::function<Eigen::Vector4d(double, double)> third;
};

namespace problems {

/// y1' = -y2, y2' = y1 + (sin y1 - y2)/eps, y(0) = (pi/2, 1), T = 5.
FluxModel pareschi_russo(double epsilon);

/// y' = (lambda/eps) y, y(0) = 1, exact solution exp((lambda/eps) t), T = 1.
FluxModel dahlquist_scaled(double lambda, double epsilon);

/// y1' = y2, y2' = alpha y1 + g(y1, y2)/eps. Initial state defaults to (0, 0).
FluxModel two_var_model(double alpha, ScalarField2 g, double epsilon);

/// van der Pol in the two-variable form with alpha = 0 and
/// g = (1 - y1^2) y2 - y1, started on the slow manifold near (2, -2/3).
FluxModel van_der_pol(double epsilon);

/// Kaps: y1' = -(2 + 1/eps) y1 + y2^2/eps, y2' = y1 - y2 - y2^2,
/// y(0) = (1, 1), exact solution (exp(-2t), exp(-t)).
FluxModel kaps(double epsilon);

/// g(u, v) = sin(u) - v, the stiff part of the Pareschi-Russo flux.
ScalarField2 pr_relaxation_field();
/// g(u, v) = (1 - u^2) v - u, the stiff part of van der Pol.
ScalarField2 van_der_pol_field();

/// Registry used by the command-line harness: "pr", "dahlquist", "vdp", "kaps".
/// `lambda` only affects "dahlquist". Throws InvalidArgument for unknown names.
FluxModel by_name(const std::string& name, double epsilon, double lambda = -1.0);
std::vector<std::string> names();

}  // namespace problems

/// Largest relative deviation between the model's analytic Jacobian and a
/// forward-difference Jacobian of its flux at `y`.
double jacobian_consistency_error(const FluxModel& model, const Vector& y);

}  // namespace mdrk
