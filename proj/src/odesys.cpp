#include "mdrk/odesys.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mdrk {
namespace {

#include "generated/time_jacobians.inc"

void require_positive_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("stiffness parameter epsilon must be positive, got " + std::to_string(epsilon));
  }
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

int FluxModel::max_ej_order() const {
  if (!flux_jacobian) return 1;
  if (!second_action) return 2;
  if (!third_action) return 3;
  return 4;
}

int FluxModel::max_rec_order() const {
  return static_cast<int>(time_deriv_jacobians.size()) + 1;
}

namespace problems {

FluxModel pareschi_russo(double epsilon) {
  require_positive_epsilon(epsilon);
  const double e = 1.0 / epsilon;
  FluxModel m;
  m.name = "pr";
  m.dim = 2;
  m.epsilon = epsilon;
  m.flux = [e](const Vector& y) { return vec2(-y(1), y(0) + e * (std::sin(y(0)) - y(1))); };
  m.flux_jacobian = [e](const Vector& y) { return mat2(0.0, -1.0, 1.0 + e * std::cos(y(0)), -e); };
  m.second_action = [e](const Vector& y, const Vector& u, const Vector& v) {
    return vec2(0.0, -e * std::sin(y(0)) * u(0) * v(0));
  };
  m.third_action = [e](const Vector& y, const Vector& u, const Vector& v, const Vector& w) {
    return vec2(0.0, -e * std::cos(y(0)) * u(0) * v(0) * w(0));
  };
  m.time_deriv_jacobians = {
      m.flux_jacobian,
      [e](const Vector& y) { return pr_time_jacobian_1(y, e); },
      [e](const Vector& y) { return pr_time_jacobian_2(y, e); },
      [e](const Vector& y) { return pr_time_jacobian_3(y, e); },
  };
  m.y0 = vec2(std::numbers::pi / 2.0, 1.0);
  m.t_end = 5.0;
  return m;
}

FluxModel dahlquist_scaled(double lambda, double epsilon) {
  require_positive_epsilon(epsilon);
  const double rate = lambda / epsilon;
  FluxModel m;
  m.name = "dahlquist";
  m.dim = 1;
  m.epsilon = epsilon;
  m.flux = [rate](const Vector& y) -> Vector { return rate * y; };
  m.flux_jacobian = [rate](const Vector&) { return Matrix::Constant(1, 1, rate); };
  m.second_action = [](const Vector&, const Vector&, const Vector&) { return Vector::Zero(1).eval(); };
  m.third_action = [](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Vector::Zero(1).eval();
  };
  for (int k = 1; k <= 8; ++k) {
    const double slope = std::pow(rate, k);
    m.time_deriv_jacobians.push_back([slope](const Vector&) { return Matrix::Constant(1, 1, slope); });
  }
  m.reference = [rate](double t) { return Vector::Constant(1, std::exp(rate * t)); };
  m.y0 = Vector::Ones(1);
  m.t_end = 1.0;
  return m;
}

FluxModel two_var_model(double alpha, ScalarField2 g, double epsilon) {
  require_positive_epsilon(epsilon);
  if (!g.value || !g.gradient) {
    throw InvalidArgument("two-variable model needs g and its first partial derivatives");
  }
  const double e = 1.0 / epsilon;
  FluxModel m;
  m.name = "two_var";
  m.dim = 2;
  m.epsilon = epsilon;
  m.flux = [alpha, e, g](const Vector& y) {
    return vec2(y(1), alpha * y(0) + e * g.value(y(0), y(1)));
  };
  m.flux_jacobian = [alpha, e, g](const Vector& y) {
    const auto dg = g.gradient(y(0), y(1));
    return mat2(0.0, 1.0, alpha + e * dg(0), e * dg(1));
  };
  if (g.hessian) {
    m.second_action = [e, g](const Vector& y, const Vector& u, const Vector& v) {
      const auto h = g.hessian(y(0), y(1));
      return vec2(0.0, e * (h(0) * u(0) * v(0) + h(1) * (u(0) * v(1) + u(1) * v(0)) + h(2) * u(1) * v(1)));
    };
  }
  if (g.hessian && g.third) {
    m.third_action = [e, g](const Vector& y, const Vector& u, const Vector& v, const Vector& w) {
      const auto t = g.third(y(0), y(1));
      const double uuu = u(0) * v(0) * w(0);
      const double uuv = u(0) * v(0) * w(1) + u(0) * v(1) * w(0) + u(1) * v(0) * w(0);
      const double uvv = u(0) * v(1) * w(1) + u(1) * v(0) * w(1) + u(1) * v(1) * w(0);
      const double vvv = u(1) * v(1) * w(1);
      return vec2(0.0, e * (t(0) * uuu + t(1) * uuv + t(2) * uvv + t(3) * vvv));
    };
  }
  m.time_deriv_jacobians = {m.flux_jacobian};
  m.y0 = Vector::Zero(2);
  m.t_end = 1.0;
  return m;
}

ScalarField2 pr_relaxation_field() {
  ScalarField2 g;
  g.value = [](double u, double v) { return std::sin(u) - v; };
  g.gradient = [](double u, double) { return Eigen::Vector2d(std::cos(u), -1.0); };
  g.hessian = [](double u, double) { return Eigen::Vector3d(-std::sin(u), 0.0, 0.0); };
  g.third = [](double u, double) { return Eigen::Vector4d(-std::cos(u), 0.0, 0.0, 0.0); };
  return g;
}

ScalarField2 van_der_pol_field() {
  ScalarField2 g;
  g.value = [](double u, double v) { return (1.0 - u * u) * v - u; };
  g.gradient = [](double u, double v) { return Eigen::Vector2d(-2.0 * u * v - 1.0, 1.0 - u * u); };
  g.hessian = [](double u, double v) { return Eigen::Vector3d(-2.0 * v, -2.0 * u, 0.0); };
  g.third = [](double, double) { return Eigen::Vector4d(0.0, -2.0, 0.0, 0.0); };
  return g;
}

FluxModel van_der_pol(double epsilon) {
  FluxModel m = two_var_model(0.0, van_der_pol_field(), epsilon);
  const double e = 1.0 / epsilon;
  m.name = "vdp";
  m.provenance = Provenance::Derived;
  m.time_deriv_jacobians = {
      m.flux_jacobian,
      [e](const Vector& y) { return vdp_time_jacobian_1(y, e); },
      [e](const Vector& y) { return vdp_time_jacobian_2(y, e); },
      [e](const Vector& y) { return vdp_time_jacobian_3(y, e); },
  };
  // Asymptotic expansion of the slow manifold through y1 = 2.
  const double eps = epsilon;
  m.y0 = vec2(2.0, -2.0 / 3.0 + 10.0 / 81.0 * eps - 292.0 / 2187.0 * eps * eps -
                       1814.0 / 19683.0 * eps * eps * eps);
  m.t_end = 0.5;
  return m;
}

FluxModel kaps(double epsilon) {
  require_positive_epsilon(epsilon);
  const double e = 1.0 / epsilon;
  FluxModel m;
  m.name = "kaps";
  m.dim = 2;
  m.epsilon = epsilon;
  m.provenance = Provenance::Derived;
  m.flux = [e](const Vector& y) {
    return vec2(-(2.0 + e) * y(0) + e * y(1) * y(1), y(0) - y(1) - y(1) * y(1));
  };
  m.flux_jacobian = [e](const Vector& y) { return mat2(-(2.0 + e), 2.0 * e * y(1), 1.0, -1.0 - 2.0 * y(1)); };
  m.second_action = [e](const Vector&, const Vector& u, const Vector& v) {
    return vec2(2.0 * e * u(1) * v(1), -2.0 * u(1) * v(1));
  };
  m.third_action = [](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Vector::Zero(2).eval();
  };
  m.time_deriv_jacobians = {
      m.flux_jacobian,
      [e](const Vector& y) { return kaps_time_jacobian_1(y, e); },
      [e](const Vector& y) { return kaps_time_jacobian_2(y, e); },
      [e](const Vector& y) { return kaps_time_jacobian_3(y, e); },
  };
  m.reference = [](double t) { return vec2(std::exp(-2.0 * t), std::exp(-t)); };
  m.y0 = vec2(1.0, 1.0);
  m.t_end = 1.0;
  return m;
}

FluxModel by_name(const std::string& name, double epsilon, double lambda) {
  if (name == "pr") return pareschi_russo(epsilon);
  if (name == "dahlquist") return dahlquist_scaled(lambda, epsilon);
  if (name == "vdp") return van_der_pol(epsilon);
  if (name == "kaps") return kaps(epsilon);
  std::string msg = "unknown problem '" + name + "'; available:";
  for (const auto& n : names()) msg += " " + n;
  throw InvalidArgument(msg);
}

std::vector<std::string> names() { return {"pr", "dahlquist", "vdp", "kaps"}; }

}  // namespace problems

double jacobian_consistency_error(const FluxModel& model, const Vector& y) {
  if (!model.flux_jacobian) throw MissingCapability("model '" + model.name + "' has no flux_jacobian");
  const Matrix analytic = model.flux_jacobian(y);
  const Vector f0 = model.flux(y);
  Matrix fd(model.dim, model.dim);
  const double scale = std::sqrt(std::numeric_limits<double>::epsilon());
  for (int j = 0; j < model.dim; ++j) {
    Vector yp = y;
    const double h = scale * (1.0 + std::abs(y(j)));
    yp(j) += h;
    fd.col(j) = (model.flux(yp) - f0) / (yp(j) - y(j));
  }
  const double norm = std::max(analytic.norm(), 1.0);
  return (fd - analytic).norm() / norm;
}

}  // namespace mdrk
