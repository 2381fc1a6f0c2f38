#include "mdrk/integrator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace mdrk {
namespace {

std::string lowered(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

struct StageData {
  Vector y;
  /// w[k-1] multiplies weight(k) in the stage and update sums: the derivative
  /// y^(k) for Direct, the unknown z_k for DerSol.
  std::vector<Vector> w;
};

class Stepper {
 public:
  Stepper(const MethodSpec& spec, const FluxModel& model, const Vector& y_n, double dt, Formulation form)
      : spec_(spec), model_(model), yn_(y_n), dt_(dt), dersol_(form == Formulation::DerSol) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step size must be positive");
    if (y_n.size() != model.dim) throw InvalidArgument("state dimension does not match the model");
    counter_ = std::make_shared<long>(0);
    model_.flux = [count = counter_, f = model.flux](const Vector& y) {
      ++*count;
      return f(y);
    };
    strategy_ = spec.strategy_for(dt);
    r_ = spec.tableau.r();
    s_ = spec.tableau.s();
    m_ = model.dim;
    block_ = dersol_ ? (r_ + 1) * m_ : m_;
    stages_.resize(static_cast<std::size_t>(s_));
    for (int k = 1; k <= r_; ++k) weights_.push_back(dersol_ ? dersol_weight(strategy_.kind, dt, k) : std::pow(dt, k));
  }

  long flux_evals() const { return *counter_; }

  /// Evaluates every stage that needs no solve and returns the next block of
  /// stages to solve, or an empty list when all stages are resolved.
  std::vector<int> next_block() {
    const auto& tab = spec_.tableau;
    const bool coupled = spec_.coupling == Coupling::FSMDRK;
    for (int l = 0; l < s_; ++l) {
      if (resolved(l)) continue;
      if (tab.stage_is_trivial(l)) {
        stages_[idx(l)] = data_at(yn_);
        continue;
      }
      if (coupled) {
        std::vector<int> block;
        for (int j = l; j < s_; ++j) {
          if (!resolved(j) && !tab.stage_is_trivial(j)) block.push_back(j);
        }
        // Trivial stages after the first implicit one still need their data.
        for (int j = l; j < s_; ++j) {
          if (!resolved(j) && tab.stage_is_trivial(j)) stages_[idx(j)] = data_at(yn_);
        }
        return block;
      }
      if (tab.stage_is_explicit(l)) {
        stages_[idx(l)] = data_at(explicit_stage_value(l));
        continue;
      }
      return {l};
    }
    return {};
  }

  StageSystem build(const std::vector<int>& block, const std::shared_ptr<Stepper>& self) const {
    StageSystem sys;
    sys.stages = block;
    sys.block_size = block_;
    const auto nb = static_cast<Eigen::Index>(block.size());
    sys.initial_guess.resize(nb * block_);
    const Vector guess = dersol_ ? stacked(data_at(yn_)) : yn_;
    for (Eigen::Index b = 0; b < nb; ++b) sys.initial_guess.segment(b * block_, block_) = guess;
    sys.residual = [self, block](const Vector& x) { return self->residual(block, x); };
    if (analytic_available()) {
      sys.jacobian = [self, block](const Vector& x) { return self->jacobian(block, x); };
    }
    return sys;
  }

  void accept(const std::vector<int>& block, const Vector& x) {
    for (std::size_t b = 0; b < block.size(); ++b) {
      stages_[idx(block[b])] = unpack(x.segment(static_cast<Eigen::Index>(b) * block_, block_));
    }
  }

  Vector update() const {
    Vector y = yn_;
    const auto& tab = spec_.tableau;
    for (int k = 1; k <= r_; ++k) {
      for (int l = 0; l < s_; ++l) {
        const double coeff = tab.b(k)(l);
        if (coeff == 0.0) continue;
        y += weights_[idx(k - 1)] * coeff * stages_[idx(l)]->w[idx(k - 1)];
      }
    }
    return y;
  }

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }

  bool resolved(int l) const { return stages_[idx(l)].has_value(); }

  bool analytic_available() const {
    if (!model_.flux_jacobian) return false;
    if (dersol_) return strategy_.kind == DerivKind::AT;
    if (strategy_.kind == DerivKind::AT) return true;
    return static_cast<int>(model_.time_deriv_jacobians.size()) >= r_;
  }

  StageData data_at(const Vector& y) const {
    StageData d;
    d.y = y;
    d.w = dersol_ ? dersol_chain(strategy_, model_, y) : derivatives_direct(strategy_, model_, y);
    return d;
  }

  Vector stacked(const StageData& d) const {
    Vector z(block_);
    z.head(m_) = d.y;
    for (int k = 1; k <= r_; ++k) z.segment(k * m_, m_) = d.w[idx(k - 1)];
    return z;
  }

  StageData unpack(const Eigen::Ref<const Vector>& x) const {
    if (!dersol_) return data_at(x);
    StageData d;
    d.y = x.head(m_);
    for (int k = 1; k <= r_; ++k) d.w.push_back(x.segment(k * m_, m_));
    return d;
  }

  Vector explicit_stage_value(int l) const {
    Vector y = yn_;
    const auto& tab = spec_.tableau;
    for (int k = 1; k <= r_; ++k) {
      for (int nu = 0; nu < l; ++nu) {
        const double a = tab.a(k)(l, nu);
        if (a == 0.0) continue;
        y += weights_[idx(k - 1)] * a * stages_[idx(nu)]->w[idx(k - 1)];
      }
    }
    return y;
  }

  /// Stage data for every stage referenced by the block rows: unknown stages
  /// come from x, the others from earlier resolution.
  std::vector<const StageData*> gather(const std::vector<int>& block, const Vector& x,
                                       std::vector<StageData>& scratch) const {
    scratch.clear();
    scratch.reserve(block.size());
    for (std::size_t b = 0; b < block.size(); ++b) {
      scratch.push_back(unpack(x.segment(static_cast<Eigen::Index>(b) * block_, block_)));
    }
    std::vector<const StageData*> view(idx(s_), nullptr);
    for (int l = 0; l < s_; ++l) {
      if (resolved(l)) view[idx(l)] = &*stages_[idx(l)];
    }
    for (std::size_t b = 0; b < block.size(); ++b) view[idx(block[b])] = &scratch[b];
    return view;
  }

  Vector residual(const std::vector<int>& block, const Vector& x) const {
    if (x.size() != static_cast<Eigen::Index>(block.size()) * block_) {
      throw InvalidArgument("stage system unknown has the wrong dimension");
    }
    std::vector<StageData> scratch;
    const auto view = gather(block, x, scratch);
    const auto& tab = spec_.tableau;
    Vector f(x.size());
    for (std::size_t b = 0; b < block.size(); ++b) {
      const int l = block[b];
      const auto off = static_cast<Eigen::Index>(b) * block_;
      Vector row = scratch[b].y - yn_;
      for (int k = 1; k <= r_; ++k) {
        for (int nu = 0; nu < s_; ++nu) {
          const double a = tab.a(k)(l, nu);
          if (a == 0.0) continue;
          if (!view[idx(nu)]) throw std::logic_error("stage row references an unresolved stage");
          row -= weights_[idx(k - 1)] * a * view[idx(nu)]->w[idx(k - 1)];
        }
      }
      f.segment(off, m_) = row;
      if (!dersol_) continue;

      std::vector<Vector> z;
      z.reserve(idx(r_ + 1));
      z.push_back(scratch[b].y);
      for (const auto& wk : scratch[b].w) z.push_back(wk);
      f.segment(off + m_, m_) = model_.flux(z[0]) - z[1];
      for (int k = 2; k <= r_; ++k) {
        f.segment(off + k * m_, m_) = psi_dersol(strategy_, model_, z, k) - z[idx(k)];
      }
    }
    return f;
  }

  Matrix jacobian(const std::vector<int>& block, const Vector& x) const {
    const auto n = x.size();
    const auto nb = block.size();
    const auto& tab = spec_.tableau;
    const Matrix eye = Matrix::Identity(m_, m_);
    Matrix jac = Matrix::Zero(n, n);

    if (!dersol_) {
      std::vector<std::vector<Matrix>> dw(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        dw[b] = derivatives_direct_jacobian(strategy_, model_, x.segment(static_cast<Eigen::Index>(b) * m_, m_));
      }
      for (std::size_t bl = 0; bl < nb; ++bl) {
        const auto row = static_cast<Eigen::Index>(bl) * m_;
        for (std::size_t bn = 0; bn < nb; ++bn) {
          const auto col = static_cast<Eigen::Index>(bn) * m_;
          Matrix blk = bl == bn ? eye : Matrix::Zero(m_, m_);
          for (int k = 1; k <= r_; ++k) {
            const double a = tab.a(k)(block[bl], block[bn]);
            if (a != 0.0) blk -= weights_[idx(k - 1)] * a * dw[bn][idx(k - 1)];
          }
          jac.block(row, col, m_, m_) = blk;
        }
      }
      return jac;
    }

    for (std::size_t bl = 0; bl < nb; ++bl) {
      const auto off = static_cast<Eigen::Index>(bl) * block_;
      jac.block(off, off, m_, m_) = eye;
      for (std::size_t bn = 0; bn < nb; ++bn) {
        const auto col = static_cast<Eigen::Index>(bn) * block_;
        for (int k = 1; k <= r_; ++k) {
          const double a = tab.a(k)(block[bl], block[bn]);
          if (a != 0.0) jac.block(off, col + k * m_, m_, m_) -= weights_[idx(k - 1)] * a * eye;
        }
      }
      std::vector<Vector> z;
      for (int k = 0; k <= r_; ++k) z.push_back(x.segment(off + k * m_, m_));
      jac.block(off + m_, off, m_, m_) = model_.flux_jacobian(z[0]);
      jac.block(off + m_, off + m_, m_, m_) = -eye;
      for (int k = 2; k <= r_; ++k) {
        const auto parts = psi_dersol_jacobian(strategy_, model_, z, k);
        for (int m = 0; m < k; ++m) jac.block(off + k * m_, off + m * m_, m_, m_) = parts[idx(m)];
        jac.block(off + k * m_, off + k * m_, m_, m_) = -eye;
      }
    }
    return jac;
  }

  MethodSpec spec_;
  FluxModel model_;
  Vector yn_;
  double dt_;
  bool dersol_;
  DerivStrategy strategy_;
  int r_ = 0;
  int s_ = 0;
  int m_ = 0;
  int block_ = 0;
  std::vector<double> weights_;
  std::vector<std::optional<StageData>> stages_;
  std::shared_ptr<long> counter_;
};

std::pair<Vector, StepTrace> run_step(const MethodSpec& spec, const FluxModel& model, const Vector& y_n,
                                      double dt, Formulation form) {
  auto stepper = std::make_shared<Stepper>(spec, model, y_n, dt, form);
  StepTrace trace;
  for (auto block = stepper->next_block(); !block.empty(); block = stepper->next_block()) {
    const StageSystem sys = stepper->build(block, stepper);
    auto [x, report] = solve(sys.residual, sys.jacobian, sys.initial_guess, spec.newton);
    const NewtonStatus status = report.status;
    trace.solves.push_back({block, std::move(report)});
    if (status != NewtonStatus::Converged) {
      trace.flux_evals = stepper->flux_evals();
      std::string msg = "Newton solve for stage " + std::to_string(block.front() + 1) + " of " +
                        spec.id() + " ended with status " + std::string(to_string(status));
      throw SolveFailure(std::move(msg), std::move(trace), block.front(), status);
    }
    stepper->accept(block, x);
  }
  trace.y_next = stepper->update();
  trace.flux_evals = stepper->flux_evals();
  return {trace.y_next, std::move(trace)};
}

}  // namespace

std::string_view to_string(Formulation f) { return f == Formulation::Direct ? "direct" : "dersol"; }
std::string_view to_string(Coupling c) { return c == Coupling::DIMDRK ? "dimdrk" : "fsmdrk"; }

Formulation parse_formulation(std::string_view text) {
  const auto s = lowered(text);
  if (s == "direct") return Formulation::Direct;
  if (s == "dersol") return Formulation::DerSol;
  throw InvalidArgument("unknown formulation '" + std::string(text) + "' (expected direct or dersol)");
}

Coupling parse_coupling(std::string_view text) {
  const auto s = lowered(text);
  if (s == "dimdrk") return Coupling::DIMDRK;
  if (s == "fsmdrk") return Coupling::FSMDRK;
  throw InvalidArgument("unknown coupling '" + std::string(text) + "' (expected dimdrk or fsmdrk)");
}

int MethodSpec::halfwidth() const {
  return stencil_halfwidth > 0 ? stencil_halfwidth : default_halfwidth(tableau.q(), tableau.r());
}

DerivStrategy MethodSpec::strategy_for(double dt) const {
  return DerivStrategy{strategy, tableau.r(), halfwidth(), dt};
}

std::string MethodSpec::id() const {
  std::string out = tableau.name();
  out += "/";
  out += to_string(strategy);
  out += "/";
  out += to_string(formulation);
  out += "/";
  out += to_string(coupling);
  return out;
}

void check_spec(const MethodSpec& spec, const FluxModel& model) {
  const auto problems = validate(spec.tableau);
  if (!problems.empty()) throw InvalidArgument("invalid tableau " + spec.tableau.name() + ": " + problems.front());
  spec.newton.check();
  require_capabilities(spec.strategy_for(1.0), model);
  if (spec.coupling == Coupling::DIMDRK && !spec.tableau.is_lower_triangular()) {
    throw InvalidArgument("tableau " + spec.tableau.name() +
                          " couples stages with later ones; use FSMDRK coupling");
  }
  if (spec.newton.jacobian_mode == JacobianMode::Analytic) {
    if (!model.flux_jacobian) throw MissingCapability("analytic Jacobian needs flux_jacobian");
    if (spec.formulation == Formulation::DerSol && spec.strategy != DerivKind::AT) {
      throw MissingCapability("analytic DerSol Jacobian is only available for the AT strategy");
    }
    if (spec.formulation == Formulation::Direct && spec.strategy != DerivKind::AT &&
        static_cast<int>(model.time_deriv_jacobians.size()) < spec.tableau.r()) {
      throw MissingCapability("analytic Direct Jacobian needs time_deriv_jacobians up to index " +
                              std::to_string(spec.tableau.r() - 1));
    }
  }
}

const NewtonReport* StepTrace::monitored() const {
  return solves.empty() ? nullptr : &solves.back().report;
}

int StepTrace::n_iter() const {
  int total = 0;
  for (const auto& s : solves) total += s.report.n_iter;
  return total;
}

StageSystem first_stage_system(const MethodSpec& spec, const FluxModel& model, const Vector& y_n, double dt) {
  check_spec(spec, model);
  auto stepper = std::make_shared<Stepper>(spec, model, y_n, dt, spec.formulation);
  const auto block = stepper->next_block();
  if (block.empty()) throw InvalidArgument("tableau " + spec.tableau.name() + " has no implicit stage");
  return stepper->build(block, stepper);
}

std::pair<Vector, StepTrace> step_direct(const MethodSpec& spec, const FluxModel& model, const Vector& y_n,
                                         double dt) {
  MethodSpec s = spec;
  s.formulation = Formulation::Direct;
  check_spec(s, model);
  return run_step(s, model, y_n, dt, Formulation::Direct);
}

std::pair<Vector, StepTrace> step_dersol(const MethodSpec& spec, const FluxModel& model, const Vector& y_n,
                                         double dt) {
  MethodSpec s = spec;
  s.formulation = Formulation::DerSol;
  check_spec(s, model);
  return run_step(s, model, y_n, dt, Formulation::DerSol);
}

std::pair<Vector, StepTrace> step(const MethodSpec& spec, const FluxModel& model, const Vector& y_n, double dt) {
  return spec.formulation == Formulation::Direct ? step_direct(spec, model, y_n, dt)
                                                 : step_dersol(spec, model, y_n, dt);
}

IntegrationResult integrate(const MethodSpec& spec, const FluxModel& model, double t_end, int n_steps) {
  if (n_steps < 1) throw InvalidArgument("n_steps must be >= 1");
  if (!(t_end > 0.0)) throw InvalidArgument("final time must be positive");
  check_spec(spec, model);

  IntegrationResult res;
  res.stats.n_steps = n_steps;
  res.stats.dt = t_end / n_steps;
  res.stats.iterations_per_step.reserve(static_cast<std::size_t>(n_steps));
  double cond_sum = 0.0;
  int cond_count = 0;
  Vector y = model.y0;
  for (int n = 0; n < n_steps; ++n) {
    try {
      auto [next, trace] = run_step(spec, model, y, res.stats.dt, spec.formulation);
      y = std::move(next);
      res.stats.iterations_per_step.push_back(trace.n_iter());
      res.stats.n_iter_total += trace.n_iter();
      res.stats.flux_evals += trace.flux_evals;
      if (const auto* mon = trace.monitored(); mon && !mon->cond1.empty()) {
        cond_sum += mon->mean_cond1;
        ++cond_count;
      }
    } catch (SolveFailure& failure) {
      failure.step = n;
      failure.completed = res.stats;
      failure.completed.n_steps = n;
      failure.completed.mean_cond1 =
          cond_count > 0 ? cond_sum / cond_count : std::numeric_limits<double>::quiet_NaN();
      throw;
    }
  }
  res.stats.mean_cond1 = cond_count > 0 ? cond_sum / cond_count : std::numeric_limits<double>::quiet_NaN();
  res.y_final = y;
  return res;
}

IntegrationResult integrate(const MethodSpec& spec, const FluxModel& model, int n_steps) {
  return integrate(spec, model, model.t_end, n_steps);
}

}  // namespace mdrk
