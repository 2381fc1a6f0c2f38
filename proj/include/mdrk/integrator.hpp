#pragma once

#include "mdrk/derivchain.hpp"
#include "mdrk/newton.hpp"
#include "mdrk/odesys.hpp"
#include "mdrk/tableau.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mdrk {

enum class Formulation { Direct, DerSol };
enum class Coupling { DIMDRK, FSMDRK };

std::string_view to_string(Formulation f);
std::string_view to_string(Coupling c);
Formulation parse_formulation(std::string_view text);
Coupling parse_coupling(std::string_view text);

struct MethodSpec {
  Tableau tableau;
  DerivKind strategy = DerivKind::AT;
  Formulation formulation = Formulation::Direct;
  Coupling coupling = Coupling::DIMDRK;
  NewtonConfig newton;
  /// AT stencil half-width; 0 selects default_halfwidth(q, r).
  int stencil_halfwidth = 0;

  int halfwidth() const;
  DerivStrategy strategy_for(double dt) const;
  /// "scheme/strategy/formulation/coupling", e.g. "HB-I2DRK4-2s/at/direct/dimdrk".
  std::string id() const;
};

/// Throws InvalidArgument / MissingCapability when `spec` cannot run on `model`.
/// DIMDRK requires every a^(k) to be lower triangular; Analytic Jacobians are
/// available for Direct (all strategies, given the model operators) and for
/// AT-DerSol.
void check_spec(const MethodSpec& spec, const FluxModel& model);

/// One Newton solve inside a step: a single stage (DIMDRK) or the coupled
/// non-trivial stages (FSMDRK). Stage indices are 0-based.
struct StageSolve {
  std::vector<int> stages;
  NewtonReport report;
};

struct StepTrace {
  std::vector<StageSolve> solves;
  long flux_evals = 0;
  Vector y_next;

  /// The solve whose conditioning is reported: the last one of the step.
  const NewtonReport* monitored() const;
  int n_iter() const;
};

struct IntegrationStats {
  int n_steps = 0;
  double dt = 0.0;
  long n_iter_total = 0;
  long flux_evals = 0;
  /// Mean over steps of the monitored solve's mu(cond); NaN without implicit solves.
  double mean_cond1 = 0.0;
  std::vector<int> iterations_per_step;
};

/// Raised when a Newton solve inside a step does not converge.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(std::string message, StepTrace trace, int stage, NewtonStatus status)
      : std::runtime_error(std::move(message)), trace(std::move(trace)), stage(stage), status(status) {}

  StepTrace trace;
  /// 0-based index of the first stage in the failing solve.
  int stage;
  NewtonStatus status;
  /// 0-based step index, set by integrate().
  int step = -1;
  /// Totals of the steps completed before the failure, set by integrate().
  IntegrationStats completed;
};

/// A nonlinear system exactly as handed to the Newton solver.
struct StageSystem {
  std::vector<int> stages;
  /// Unknowns per stage: M (Direct) or (r+1) M (DerSol, ordered z_0..z_r).
  int block_size = 0;
  Vector initial_guess;
  ResidualFn residual;
  /// Empty when no analytic Jacobian exists for the method.
  JacobianFn jacobian;
};

/// The first system a step from y_n would solve, with all trivial and
/// explicit stages before it already evaluated. Throws InvalidArgument when
/// the tableau has no implicit stage.
StageSystem first_stage_system(const MethodSpec& spec, const FluxModel& model, const Vector& y_n,
                               double dt);

/// One step of the Direct formulation (spec.formulation is ignored).
std::pair<Vector, StepTrace> step_direct(const MethodSpec& spec, const FluxModel& model,
                                         const Vector& y_n, double dt);
/// One step of the DerSol formulation (spec.formulation is ignored).
std::pair<Vector, StepTrace> step_dersol(const MethodSpec& spec, const FluxModel& model,
                                         const Vector& y_n, double dt);
/// Dispatches on spec.formulation.
std::pair<Vector, StepTrace> step(const MethodSpec& spec, const FluxModel& model, const Vector& y_n,
                                  double dt);

struct IntegrationResult {
  Vector y_final;
  IntegrationStats stats;
};

/// Fixed-step integration from model.y0 over [0, t_end] in n_steps steps.
/// Throws SolveFailure (with `step` set) when a step fails.
IntegrationResult integrate(const MethodSpec& spec, const FluxModel& model, double t_end, int n_steps);
IntegrationResult integrate(const MethodSpec& spec, const FluxModel& model, int n_steps);

}  // namespace mdrk
