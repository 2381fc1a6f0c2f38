#include "mdrk/newton.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/LU>

namespace mdrk {
namespace {

constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

double norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

bool all_finite(const Vector& v) { return v.allFinite(); }

Matrix fd_columns(const ResidualFn& residual, const Vector& y, double fd_step_scale, const Vector& base) {
  const double scale = fd_step_scale > 0.0 ? fd_step_scale : std::sqrt(kMachineEps);
  Matrix jac(base.size(), y.size());
  Vector yp = y;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double h = scale * (1.0 + std::abs(y(j)));
    yp(j) = y(j) + h;
    const double step = yp(j) - y(j);  // representable increment
    jac.col(j) = (residual(yp) - base) / step;
    yp(j) = y(j);
  }
  return jac;
}

}  // namespace

std::string_view to_string(JacobianMode mode) {
  return mode == JacobianMode::Analytic ? "analytic" : "fd";
}

std::string_view to_string(NewtonStatus status) {
  switch (status) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::MaxIterations: return "max_iterations";
    case NewtonStatus::Diverged: return "diverged";
    case NewtonStatus::SingularJacobian: return "singular_jacobian";
    case NewtonStatus::NonFinite: return "non_finite";
  }
  return "?";
}

void NewtonConfig::check() const {
  if (n_tol < 1 || n_tol0 < 1) throw InvalidArgument("Newton tolerances n_tol, n_tol0 must be >= 1");
  if (max_iter < 1) throw InvalidArgument("Newton max_iter must be >= 1");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw InvalidArgument("Newton backtracking factor must lie in (0, 1)");
  if (!(min_step_fraction > 0.0 && min_step_fraction <= 1.0))
    throw InvalidArgument("Newton minimum step fraction must lie in (0, 1]");
  if (fd_step_scale < 0.0) throw InvalidArgument("finite-difference step scale must be >= 0");
}

Matrix fd_jacobian(const ResidualFn& residual, const Vector& y, double fd_step_scale, const Vector* f0) {
  const Vector base = f0 ? *f0 : residual(y);
  if (!all_finite(base)) throw InvalidArgument("residual is not finite at the Jacobian base point");
  Matrix jac = fd_columns(residual, y, fd_step_scale, base);
  if (!jac.allFinite()) throw InvalidArgument("residual is not finite at a Jacobian probe point");
  return jac;
}

double cond1(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("cond1 needs a non-empty square matrix");
  Eigen::PartialPivLU<Matrix> lu(a);
  const Matrix inv = lu.solve(Matrix::Identity(a.rows(), a.cols()));
  return norm1(a) * norm1(inv);
}

std::pair<Vector, NewtonReport> solve(const ResidualFn& residual, const JacobianFn& jacobian,
                                      const Vector& y_init, const NewtonConfig& cfg) {
  cfg.check();
  if (cfg.jacobian_mode == JacobianMode::Analytic && !jacobian) {
    throw InvalidArgument("analytic Jacobian mode requested without a Jacobian function");
  }
  const double atol = std::pow(10.0, -cfg.n_tol);
  const double rtol = std::pow(10.0, -cfg.n_tol0);
  const auto n = y_init.size();

  NewtonReport rep;
  Vector y = y_init;
  Vector f = residual(y);
  ++rep.residual_evals;
  if (f.size() != n) throw InvalidArgument("residual dimension does not match the unknown");

  double fn = f.norm();
  rep.initial_residual = fn;
  rep.final_residual = fn;
  auto finish = [&](NewtonStatus status) {
    rep.status = status;
    rep.converged = status == NewtonStatus::Converged;
    rep.n_iter = static_cast<int>(rep.residuals.size());
    rep.final_residual = fn;
    if (!rep.cond1.empty()) {
      rep.mean_cond1 = std::accumulate(rep.cond1.begin(), rep.cond1.end(), 0.0) /
                       static_cast<double>(rep.cond1.size());
    }
    return std::pair<Vector, NewtonReport>{y, rep};
  };

  if (!std::isfinite(fn)) return finish(NewtonStatus::NonFinite);
  if (fn < atol) return finish(NewtonStatus::Converged);
  const double f0n = fn;
  const double blowup = cfg.divergence_factor * std::max(1.0, f0n);

  for (int it = 0; it < cfg.max_iter; ++it) {
    Matrix jac;
    if (cfg.jacobian_mode == JacobianMode::Analytic) {
      jac = jacobian(y);
    } else {
      jac = fd_columns(residual, y, cfg.fd_step_scale, f);
      rep.residual_evals += n;
    }
    if (jac.rows() != n || jac.cols() != n) throw InvalidArgument("Jacobian has the wrong shape");
    if (!jac.allFinite()) return finish(NewtonStatus::NonFinite);

    Eigen::PartialPivLU<Matrix> lu(jac);
    const double anorm = norm1(jac);
    const double inv_norm = norm1(lu.solve(Matrix::Identity(n, n)));
    double cond = anorm * inv_norm;
    if (!std::isfinite(cond)) cond = std::numeric_limits<double>::infinity();
    rep.residuals.push_back(fn);
    rep.cond1.push_back(cond);

    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > 1e3 * kMachineEps * anorm)) return finish(NewtonStatus::SingularJacobian);

    const Vector dy = lu.solve(-f);

    Vector y_next = y + dy;
    Vector f_next = residual(y_next);
    ++rep.residual_evals;
    double fn_next = f_next.norm();
    if (cfg.damping && !(fn_next < fn)) {
      for (double eta = cfg.backtrack_factor; eta >= cfg.min_step_fraction; eta *= cfg.backtrack_factor) {
        Vector y_try = y + eta * dy;
        Vector f_try = residual(y_try);
        ++rep.residual_evals;
        const double fn_try = f_try.norm();
        if (fn_try < fn) {
          y_next = std::move(y_try);
          f_next = std::move(f_try);
          fn_next = fn_try;
          break;
        }
      }
      // Without a reducing fraction the full step computed above is kept.
    }
    y = std::move(y_next);
    f = std::move(f_next);
    fn = fn_next;

    if (!std::isfinite(fn) || fn > blowup) {
      rep.divergence_iter = it + 1;
      return finish(NewtonStatus::Diverged);
    }
    if (fn < atol || fn / f0n < rtol) return finish(NewtonStatus::Converged);
  }
  return finish(NewtonStatus::MaxIterations);
}

std::vector<double> empirical_order_eps(const std::vector<std::pair<double, double>>& means) {
  if (means.size() < 2) throw InvalidArgument("empirical_order_eps needs at least two entries");
  std::vector<double> eo;
  eo.reserve(means.size() - 1);
  for (std::size_t i = 1; i < means.size(); ++i) {
    eo.push_back(std::log10(means[i].second / means[i - 1].second));
  }
  return eo;
}

}  // namespace mdrk
