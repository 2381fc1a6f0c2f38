// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance              all criteria
//   acceptance -c 3 -c 6    selected ones
// Exit status is 0 only when every selected criterion passes.

#include "mdrk/integrator.hpp"
#include "mdrk/lab.hpp"
#include "mdrk/stencil.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mdrk;
using mdrk::lab::LabOptions;
using mdrk::lab::RunRecord;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Accumulates sub-checks; the criterion passes when all of them do.
struct Checks {
  Outcome out;
  std::ostringstream log;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      out.pass = false;
      log << "  FAILED " << what << '\n';
    } else {
      log << "  ok     " << what << '\n';
    }
  }
  Outcome done() {
    out.detail = log.str();
    return out;
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

MethodSpec method(const std::string& scheme, DerivKind kind, Formulation form, Coupling coupling,
                  NewtonConfig cfg = {}) {
  return MethodSpec{builtin_tableau(scheme), kind, form, coupling, cfg, 0};
}

double falling(int m, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= m - i;
  return out;
}

// 1. Stencil exactness on random polynomials.
Outcome stencil_exactness() {
  Checks c;
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), center(-2.0, 2.0), step(0.1, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (int k = 1; k <= 4; ++k) {
    for (int p = stencil::min_halfwidth(k); p <= 4; ++p) {
      const auto& w = stencil::make_weights(k, p);
      const int degree = k + w.omega - 1;
      for (int trial = 0; trial < 50; ++trial, ++cases) {
        std::vector<double> a(static_cast<std::size_t>(degree + 1));
        for (auto& ai : a) ai = coef(gen);
        const double t0 = center(gen), h = step(gen);
        auto poly = [&](double t) {
          const double s = (t - t0) / h;
          double v = 0.0;
          for (int m = degree; m >= 0; --m) v = v * s + a[static_cast<std::size_t>(m)];
          return v;
        };
        std::vector<Vector> vals;
        for (int j = -p; j <= p; ++j) vals.push_back(Vector::Constant(1, poly(t0 + j * h)));
        const double exact = falling(k, k) * a[static_cast<std::size_t>(k)] / std::pow(h, k);
        const double got = stencil::apply(w, vals, h)(0);
        worst = std::max(worst, std::abs(got - exact) / std::max(std::abs(exact), std::pow(h, -k)));
      }
    }
  }
  c.expect(worst <= 1e-9, fmt("max relative error %.2e over %d random polynomials (<= 1e-9)", worst, cases));
  return c.done();
}

// 2. AT and EJ coincide on the scaled Dahlquist problem.
Outcome linear_collapse() {
  Checks c;
  auto m = problems::dahlquist_scaled(-1.0, 1e-3);
  for (const std::string scheme : {"ImplTaylor-3", "HB-I2DRK4-2s"}) {
    for (auto form : {Formulation::Direct, Formulation::DerSol}) {
      double worst = 0.0;
      for (double dt : {1e-4, 1e-3, 1e-2}) {
        const Vector at = step(method(scheme, DerivKind::AT, form, Coupling::DIMDRK), m, m.y0, dt).first;
        const Vector ej = step(method(scheme, DerivKind::EJ, form, Coupling::DIMDRK), m, m.y0, dt).first;
        worst = std::max(worst, (at - ej).norm());
      }
      c.expect(worst <= 1e-12, fmt("%s %s |AT - EJ| = %.2e (<= 1e-12)", scheme.c_str(),
                                   std::string(to_string(form)).c_str(), worst));
    }
  }
  return c.done();
}

std::vector<RunRecord> convergence(const std::string& scheme, DerivKind kind, int p) {
  LabOptions o;
  o.scheme = scheme;
  o.strategy = kind;
  o.problem = "pr";
  o.epsilons = {1.0};
  o.t_end = 5.0;
  o.n_steps = {4, 8, 16, 32, 64, 128};
  o.halfwidth = p;
  return lab::cmd_convergence(o);
}

std::string eoc_list(const std::vector<RunRecord>& rows) {
  std::string s;
  for (const auto& r : rows) {
    if (r.eoc) s += fmt(" %.2f", *r.eoc);
  }
  return s;
}

// EOC between the two finest grids.
double finest_eoc(const std::vector<RunRecord>& rows) {
  return rows.back().eoc ? *rows.back().eoc : std::nan("");
}

// 3. Convergence orders on PR.
Outcome convergence_orders() {
  Checks c;
  struct Row {
    const char* scheme;
    int q;
  };
  for (const Row row : {Row{"HB-I2DRK4-2s", 4}, Row{"HB-I3DRK6-2s", 6}, Row{"SSP-I2DRK3-2s", 3}, Row{"SSP-I2DRK4-5s", 4}}) {
    for (auto kind : {DerivKind::AT, DerivKind::Rec}) {
      const auto rows = convergence(row.scheme, kind, 0);
      bool all_converged = true;
      for (const auto& r : rows) all_converged = all_converged && r.converged;
      const double e = finest_eoc(rows);
      c.expect(all_converged && std::abs(e - row.q) <= 0.4,
               fmt("%s %s finest EOC %.3f, want %d +- 0.4 (EOCs:%s)", row.scheme,
                   std::string(to_string(kind)).c_str(), e, row.q, eoc_list(rows).c_str()));
      if (row.q == 6) {
        const double fine = *rows.back().l2_error;
        c.expect(fine < 1e-8, fmt("%s %s finest error %.2e (< 1e-8)", row.scheme,
                                  std::string(to_string(kind)).c_str(), fine));
      }
    }
  }
  return c.done();
}

// 4. Forcing p = 1 on HB-I2DRK4-2s.
Outcome halfwidth_cap() {
  Checks c;
  const auto rows = convergence("HB-I2DRK4-2s", DerivKind::AT, 1);
  const double e = finest_eoc(rows);
  c.expect(std::abs(e - 3.0) <= 0.4, fmt("HB-I2DRK4-2s AT p=1 finest EOC %.3f, want 3 +- 0.4 (EOCs:%s)", e,
                                         eoc_list(rows).c_str()));
  return c.done();
}

NewtonConfig sweep_newton(JacobianMode mode) {
  NewtonConfig cfg;
  cfg.max_iter = 10000;
  cfg.jacobian_mode = mode;
  return cfg;
}

// 5. Iteration and conditioning bands for ImplTaylor-3 A-Direct, dt = 1.
Outcome stiff_bands() {
  Checks c;
  LabOptions o;
  o.scheme = "ImplTaylor-3";
  o.strategy = DerivKind::AT;
  o.problem = "pr";
  o.t_end = 1.0;
  o.n_steps = {1};
  o.newton = sweep_newton(JacobianMode::FiniteDifference);
  o.epsilons = {1.0, 1e-2, 1e-3, 1e-5};
  const auto rows = lab::cmd_conditioning(o);
  const auto& e1 = rows[0];
  c.expect(e1.converged && e1.n_iter_total <= 10, fmt("eps=1: %ld iterations (<= 10)", e1.n_iter_total));
  c.expect(e1.mean_cond1 && *e1.mean_cond1 >= 2 && *e1.mean_cond1 <= 10,
           fmt("eps=1: mu = %.3g (in [2, 10])", e1.mean_cond1.value_or(-1)));
  const auto& e3 = rows[2];
  const double mu3 = e3.mean_cond1.value_or(-1);
  c.expect(mu3 > 0 && std::abs(std::log10(mu3 / 2.71e8)) <= 1.0,
           fmt("eps=1e-3: mu = %.3g (within a decade of 2.71e8; converged=%s, %ld iterations)", mu3,
               e3.converged ? "true" : "false", e3.n_iter_total));
  const double eo = e3.eo_eps.value_or(std::nan(""));
  c.expect(std::abs(eo - 3.0) <= 0.3, fmt("EO 1e-2 -> 1e-3 = %.3f (3.0 +- 0.3)", eo));
  c.expect(!rows[3].converged, fmt("eps=1e-5: converged=%s after %ld iterations (must not converge)",
                                   rows[3].converged ? "true" : "false", rows[3].n_iter_total));
  return c.done();
}

/// Least-squares slope of log10 mu against -log10 eps over 1e-1..1e-4.
double conditioning_slope(const std::string& scheme, DerivKind kind, Formulation form, Coupling coupling,
                          JacobianMode mode, std::string& info) {
  LabOptions o;
  o.scheme = scheme;
  o.strategy = kind;
  o.formulation = form;
  o.coupling = coupling;
  o.problem = "pr";
  o.t_end = 1.25;
  o.n_steps = {1};
  o.newton = sweep_newton(mode);
  o.epsilons = {1e-1, 1e-2, 1e-3, 1e-4};
  const auto rows = lab::cmd_conditioning(o);
  std::vector<double> x, y;
  info.clear();
  for (const auto& r : rows) {
    info += fmt(" %.2e%s", r.mean_cond1.value_or(std::nan("")), r.converged ? "" : "*");
    if (!r.mean_cond1) continue;
    x.push_back(-std::log10(r.epsilon));
    y.push_back(std::log10(*r.mean_cond1));
  }
  return x.size() >= 2 ? lab::least_squares_slope(x, y) : std::nan("");
}

// 6. Direct conditioning slopes.
Outcome direct_slopes() {
  Checks c;
  struct Row {
    const char* scheme;
    Coupling coupling;
  };
  for (const Row row : {Row{"ImplTaylor-3", Coupling::DIMDRK}, Row{"ImplTaylor-4", Coupling::DIMDRK},
                        Row{"HB-I2DRK4-2s", Coupling::DIMDRK}, Row{"HB-I3DRK6-2s", Coupling::DIMDRK},
                        Row{"HB-I2DRK6-3s", Coupling::FSMDRK}}) {
    const int r = builtin_tableau(row.scheme).r();
    for (auto kind : {DerivKind::AT, DerivKind::Rec}) {
      std::string info;
      const double s =
          conditioning_slope(row.scheme, kind, Formulation::Direct, row.coupling, JacobianMode::Analytic, info);
      c.expect(std::abs(s - r) <= 0.5, fmt("%s %s-Direct %s slope %.2f, want %d +- 0.5 (mu:%s)", row.scheme,
                                           std::string(to_string(kind)).c_str(),
                                           std::string(to_string(row.coupling)).c_str(), s, r, info.c_str()));
    }
  }
  return c.done();
}

// 7. DerSol conditioning slopes.
Outcome dersol_slopes() {
  Checks c;
  for (const std::string scheme : {"ImplTaylor-3", "HB-I2DRK4-2s", "HB-I3DRK6-2s", "SSP-I2DRK3-2s", "SSP-I2DRK4-5s"}) {
    for (auto kind : {DerivKind::AT, DerivKind::EJ}) {
      std::string info;
      const double s = conditioning_slope(scheme, kind, Formulation::DerSol, Coupling::DIMDRK,
                                          JacobianMode::FiniteDifference, info);
      c.expect(std::abs(s - 1.0) <= 0.5, fmt("%s %s-DerSol slope %.2f, want 1 +- 0.5 (mu:%s)", scheme.c_str(),
                                             std::string(to_string(kind)).c_str(), s, info.c_str()));
    }
  }
  for (const std::string scheme : {"ImplTaylor-3", "HB-I3DRK6-2s"}) {
    const int r = builtin_tableau(scheme).r();
    std::string info;
    const double s = conditioning_slope(scheme, DerivKind::Rec, Formulation::DerSol, Coupling::DIMDRK,
                                        JacobianMode::FiniteDifference, info);
    c.expect(std::abs(s - (r - 1)) <= 0.5, fmt("%s rec-DerSol slope %.2f, want %d +- 0.5 (mu:%s)", scheme.c_str(), s,
                                               r - 1, info.c_str()));
  }
  return c.done();
}

// 8. Formulation and coupling equivalence from random initial states.
Outcome equivalence() {
  Checks c;
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const std::vector<std::string> schemes = {"ImplTaylor-1", "ImplTaylor-2", "ImplTaylor-3", "ImplTaylor-4",
                                            "HB-I2DRK4-2s", "HB-I2DRK6-3s", "HB-I2DRK8-4s", "HB-I3DRK6-2s",
                                            "HB-I3DRK9-3s", "HB-I4DRK8-2s", "SSP-I2DRK3-2s", "SSP-I2DRK4-5s"};
  double worst_form = 0.0, worst_coupling = 0.0;
  int form_cases = 0, coupling_cases = 0;
  for (int sample = 0; sample < 3; ++sample) {
    auto m = problems::pareschi_russo(1.0);
    m.y0(0) += u(gen);
    m.y0(1) += u(gen);
    for (const auto& scheme : schemes) {
      const auto tab = builtin_tableau(scheme);
      const Coupling native = tab.is_lower_triangular() ? Coupling::DIMDRK : Coupling::FSMDRK;
      for (auto kind : {DerivKind::EJ, DerivKind::Rec, DerivKind::AT}) {
        auto direct_spec = method(scheme, kind, Formulation::Direct, native);
        try {
          check_spec(direct_spec, m);
        } catch (const std::exception&) {
          continue;  // strategy not applicable to this scheme
        }
        const Vector direct = integrate(direct_spec, m, 5.0, 20).y_final;
        const Vector dersol = integrate(method(scheme, kind, Formulation::DerSol, native), m, 5.0, 20).y_final;
        worst_form = std::max(worst_form, (direct - dersol).norm());
        ++form_cases;
        if (native == Coupling::DIMDRK) {
          const Vector full = integrate(method(scheme, kind, Formulation::Direct, Coupling::FSMDRK), m, 5.0, 20).y_final;
          worst_coupling = std::max(worst_coupling, (direct - full).norm());
          ++coupling_cases;
        }
      }
    }
  }
  c.expect(worst_form <= 1e-9, fmt("Direct vs DerSol max difference %.2e over %d runs (<= 1e-9)", worst_form, form_cases));
  c.expect(worst_coupling <= 1e-10,
           fmt("DIMDRK vs FSMDRK max difference %.2e over %d runs (<= 1e-10)", worst_coupling, coupling_cases));
  return c.done();
}

// Independent Gauss-Jordan inverse for the condition-number oracle.
Matrix gauss_jordan_inverse(Matrix a) {
  const auto n = a.rows();
  Matrix inv = Matrix::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    }
    a.row(col).swap(a.row(piv));
    inv.row(col).swap(inv.row(piv));
    const double d = a(col, col);
    a.row(col) /= d;
    inv.row(col) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      a.row(r) -= f * a.row(col);
      inv.row(r) -= f * inv.row(col);
    }
  }
  return inv;
}

double norm1(const Matrix& a) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

// 9. Newton solver oracles.
Outcome newton_oracles() {
  Checks c;
  auto m = problems::pareschi_russo(1.0);
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  double worst_fd = 0.0;
  for (const std::string scheme : {"ImplTaylor-2", "ImplTaylor-3", "HB-I2DRK4-2s", "HB-I3DRK6-2s"}) {
    for (auto kind : {DerivKind::AT, DerivKind::EJ, DerivKind::Rec}) {
      const auto sys = first_stage_system(method(scheme, kind, Formulation::Direct, Coupling::DIMDRK), m, m.y0, 0.5);
      for (int i = 0; i < 5; ++i) {
        Vector x = sys.initial_guess;
        for (auto& xi : x) xi += u(gen);
        const Matrix an = sys.jacobian(x);
        const Matrix fd = fd_jacobian(sys.residual, x, 0.0);
        worst_fd = std::max(worst_fd, (fd - an).norm() / an.norm());
      }
    }
  }
  c.expect(worst_fd <= 1e-5, fmt("FD vs analytic stage Jacobian on PR: max relative error %.2e (<= 1e-5)", worst_fd));

  std::uniform_real_distribution<double> v(-1.0, 1.0);
  double worst_cond = 0.0;
  for (int t = 0; t < 100; ++t) {
    Matrix a(6, 6);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = v(gen);
    a += 3.0 * Matrix::Identity(6, 6);
    const double oracle = norm1(a) * norm1(gauss_jordan_inverse(a));
    worst_cond = std::max(worst_cond, std::abs(cond1(a) - oracle) / oracle);
  }
  c.expect(worst_cond <= 1e-8, fmt("cond1 vs Gauss-Jordan on 100 random 6x6: max relative error %.2e (<= 1e-8)", worst_cond));

  const double eo = empirical_order_eps({{1e-2, 2.69e5}, {1e-3, 2.71e8}}).front();
  c.expect(std::abs(eo - 3.00) <= 0.01, fmt("EO from 2.69e5 -> 2.71e8 = %.4f (3.00 +- 0.01)", eo));
  return c.done();
}

// 10. ImplTaylor-2 residual on the two-variable model against a hand transcription.
Outcome two_variable_residual() {
  Checks c;
  std::mt19937 gen(10);
  std::uniform_real_distribution<double> u(-1.5, 1.5), pos(0.05, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = u(gen), eps = pos(gen), dt = pos(gen);
    const auto field = trial % 2 ? problems::van_der_pol_field() : problems::pr_relaxation_field();
    auto m = problems::two_var_model(alpha, field, eps);
    Vector yn(2), y(2);
    yn << u(gen), u(gen);
    y << u(gen), u(gen);
    const double g = field.value(y(0), y(1));
    const Eigen::Vector2d dg = field.gradient(y(0), y(1));
    const double f2 = alpha * y(0) + g / eps;
    Vector hand(2);
    hand(0) = y(0) - dt * y(1) + dt * dt / 2 * f2 - yn(0);
    hand(1) = y(1) - dt * f2 + dt * dt / 2 * (alpha * y(1) + dg(0) / eps * y(1) + dg(1) / eps * f2) - yn(1);
    for (auto kind : {DerivKind::EJ, DerivKind::Rec}) {
      const auto sys = first_stage_system(method("ImplTaylor-2", kind, Formulation::Direct, Coupling::DIMDRK), m, yn, dt);
      const Vector got = sys.residual(y);
      worst = std::max(worst, (got - hand).cwiseAbs().maxCoeff() / std::max(1.0, hand.cwiseAbs().maxCoeff()));
    }
  }
  c.expect(worst <= 1e-12, fmt("max deviation %.2e at 20 random states (<= 1e-12)", worst));
  return c.done();
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  bool verbose = false;
  app.add_option("-c,--criterion", selected, "Criterion number(s) to run (default all)")->check(CLI::Range(1, 10));
  app.add_flag("-v,--verbose", verbose, "Print every sub-check");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "stencil exactness", stencil_exactness},
      {2, "linear collapse", linear_collapse},
      {3, "convergence orders", convergence_orders},
      {4, "p=1 order cap", halfwidth_cap},
      {5, "ImplTaylor-3 A-Direct bands", stiff_bands},
      {6, "Direct conditioning slopes", direct_slopes},
      {7, "DerSol conditioning slopes", dersol_slopes},
      {8, "formulation/coupling equivalence", equivalence},
      {9, "Newton oracles", newton_oracles},
      {10, "two-variable residual", two_variable_residual},
  };

  int failures = 0;
  for (const auto& crit : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), crit.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = crit.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("  FAILED exception: ") + e.what() + "\n";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", crit.id, crit.title, secs);
    if (verbose || !out.pass) std::fputs(out.detail.c_str(), stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
