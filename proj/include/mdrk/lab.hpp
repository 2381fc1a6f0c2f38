#pragma once

#include "mdrk/integrator.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mdrk::lab {

/// One experiment row. Optional fields render as empty CSV cells.
struct RunRecord {
  std::string method;
  double epsilon = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  std::optional<double> l2_error;
  std::optional<double> eoc;
  long n_iter_total = 0;
  std::optional<double> mean_cond1;
  std::optional<double> eo_eps;
  bool converged = true;
};

struct LabOptions {
  std::string scheme = "HB-I2DRK4-2s";
  DerivKind strategy = DerivKind::AT;
  Formulation formulation = Formulation::Direct;
  Coupling coupling = Coupling::DIMDRK;
  std::string problem = "pr";
  std::vector<double> epsilons{1.0};
  /// Unset: the model's own final time (convergence, integrate) or 1.25 (conditioning).
  std::optional<double> t_end;
  /// Unset: 4, 8, ..., 256 (convergence) or 1 (conditioning, integrate).
  std::vector<int> n_steps;
  NewtonConfig newton;
  /// AT half-width override; 0 keeps floor(q/2).
  int halfwidth = 0;
  /// Dahlquist rate numerator.
  double lambda = -1.0;
  /// Compute a numerical reference when the problem has no exact solution.
  bool numeric_reference = true;
  /// Reference cache directory; empty uses $MDRK_CACHE_DIR or a temp-dir default.
  std::string cache_dir;
  /// Evaluate sweep points concurrently.
  bool parallel = true;
};

MethodSpec make_spec(const LabOptions& opts);
FluxModel make_model(const LabOptions& opts, double epsilon);

/// Convergence sweep over opts.n_steps at opts.epsilons.front(): l2 error of
/// the final state against the reference and EOC between consecutive rows.
std::vector<RunRecord> cmd_convergence(const LabOptions& opts);

/// Conditioning sweep over opts.epsilons: mu(cond) of the monitored solve
/// (last implicit stage under DIMDRK, the coupled system under FSMDRK) and
/// EO_eps between consecutive rows. Failed runs are kept with converged=false.
std::vector<RunRecord> cmd_conditioning(const LabOptions& opts);

struct IntegrateOutput {
  RunRecord record;
  Vector y_final;
  std::vector<int> iterations_per_step;
};

/// Single integration at opts.epsilons.front() with opts.n_steps.front() steps.
IntegrateOutput cmd_integrate(const LabOptions& opts);

/// Reference final state: exact when the model provides one, otherwise a
/// rec-Direct HB-I3DRK6-2s run with n_ref steps, cached on disk.
Vector reference_solution(const LabOptions& opts, const FluxModel& model, double t_end, int n_ref);

/// Directory used for cached reference solutions.
std::string cache_directory(const LabOptions& opts);

void write_csv(std::ostream& out, const std::vector<RunRecord>& rows);
std::vector<RunRecord> read_csv(std::istream& in);

/// Log-log SVG: error against dt when the rows hold several step sizes,
/// otherwise mu(cond) against epsilon. One polyline per method.
std::string render_svg(const std::vector<RunRecord>& rows, const std::string& title = "");

/// log2(e_{i-1}/e_i) / log2(N_i/N_{i-1}) for each consecutive pair.
double eoc(double err_coarse, double err_fine, int n_coarse, int n_fine);

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mdrk::lab
