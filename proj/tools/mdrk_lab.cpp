// mdrk-lab: convergence and conditioning experiments for implicit MDRK schemes.

#include "mdrk/lab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using mdrk::lab::LabOptions;
using mdrk::lab::RunRecord;

struct Flags {
  std::string scheme = "HB-I2DRK4-2s";
  std::string strategy = "at";
  std::string formulation = "direct";
  std::string coupling = "dimdrk";
  std::string problem = "pr";
  std::vector<double> epsilons;
  double tend = 0.0;
  std::vector<int> nsteps;
  int ntol = 12;
  int ntol0 = 12;
  int maxiter = 1000;
  int p = 0;
  double lambda = -1.0;
  std::string jacobian = "fd";
  std::string out;
  std::string in;
  std::string title;
  bool serial = false;
};

void add_method_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scheme", f.scheme, "Tableau name, e.g. HB-I2DRK4-2s or ImplTaylor-3")->capture_default_str();
  cmd->add_option("--strategy", f.strategy, "Derivative strategy")
      ->check(CLI::IsMember({"at", "ej", "rec"}, CLI::ignore_case))
      ->capture_default_str();
  cmd->add_option("--formulation", f.formulation, "Residual formulation")
      ->check(CLI::IsMember({"direct", "dersol"}, CLI::ignore_case))
      ->capture_default_str();
  cmd->add_option("--coupling", f.coupling, "Stage coupling")
      ->check(CLI::IsMember({"dimdrk", "fsmdrk"}, CLI::ignore_case))
      ->capture_default_str();
  cmd->add_option("--problem", f.problem, "Benchmark problem")
      ->check(CLI::IsMember({"pr", "dahlquist", "vdp", "kaps"}))
      ->capture_default_str();
  cmd->add_option("--epsilon", f.epsilons, "Stiffness parameter(s), comma separated")->delimiter(',');
  cmd->add_option("--tend", f.tend, "Final time (default depends on the command)");
  cmd->add_option("--nsteps", f.nsteps, "Step count(s), comma separated")->delimiter(',');
  cmd->add_option("--ntol", f.ntol, "Absolute residual exponent")->capture_default_str();
  cmd->add_option("--ntol0", f.ntol0, "Relative residual exponent")->capture_default_str();
  cmd->add_option("--maxiter", f.maxiter, "Newton iteration cap")->capture_default_str();
  cmd->add_option("--p", f.p, "AT stencil half-width (default floor(q/2))");
  cmd->add_option("--lambda", f.lambda, "Dahlquist rate numerator")->capture_default_str();
  cmd->add_option("--jacobian", f.jacobian, "Newton Jacobian assembly")
      ->check(CLI::IsMember({"fd", "analytic"}))
      ->capture_default_str();
  cmd->add_option("--out", f.out, "CSV output file (default stdout)");
  cmd->add_flag("--serial", f.serial, "Evaluate sweep points one at a time");
}

LabOptions to_options(const Flags& f) {
  LabOptions o;
  o.scheme = f.scheme;
  o.strategy = mdrk::parse_deriv_kind(f.strategy);
  o.formulation = mdrk::parse_formulation(f.formulation);
  o.coupling = mdrk::parse_coupling(f.coupling);
  o.problem = f.problem;
  if (!f.epsilons.empty()) o.epsilons = f.epsilons;
  if (f.tend > 0.0) o.t_end = f.tend;
  o.n_steps = f.nsteps;
  o.newton.n_tol = f.ntol;
  o.newton.n_tol0 = f.ntol0;
  o.newton.max_iter = f.maxiter;
  o.newton.jacobian_mode = f.jacobian == "analytic" ? mdrk::JacobianMode::Analytic : mdrk::JacobianMode::FiniteDifference;
  o.halfwidth = f.p;
  o.lambda = f.lambda;
  o.parallel = !f.serial;
  return o;
}

void emit(const std::vector<RunRecord>& rows, const std::string& out) {
  if (out.empty()) {
    mdrk::lab::write_csv(std::cout, rows);
    return;
  }
  std::ofstream file(out);
  if (!file) throw mdrk::InvalidArgument("cannot open output file '" + out + "'");
  mdrk::lab::write_csv(file, rows);
}

int exit_code(const std::vector<RunRecord>& rows) {
  for (const auto& r : rows) {
    if (!r.converged) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments with implicit multiderivative Runge-Kutta schemes"};
  app.require_subcommand(1);
  Flags f;

  auto* conv = app.add_subcommand("convergence", "Error and EOC over a list of step counts");
  auto* cond = app.add_subcommand("conditioning", "Mean Newton-Jacobian condition number over epsilons");
  auto* integ = app.add_subcommand("integrate", "Single integration; prints the final state");
  auto* plot = app.add_subcommand("plot", "Render a run-record CSV as an SVG plot");
  for (auto* cmd : {conv, cond, integ}) add_method_flags(cmd, f);
  plot->add_option("--in", f.in, "Input CSV")->required();
  plot->add_option("--out", f.out, "Output SVG")->required();
  plot->add_option("--title", f.title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*plot) {
      std::ifstream in(f.in);
      if (!in) throw mdrk::InvalidArgument("cannot open input file '" + f.in + "'");
      const auto rows = mdrk::lab::read_csv(in);
      std::ofstream out(f.out);
      if (!out) throw mdrk::InvalidArgument("cannot open output file '" + f.out + "'");
      out << mdrk::lab::render_svg(rows, f.title);
      return 0;
    }
    const LabOptions opts = to_options(f);
    if (*conv) {
      const auto rows = mdrk::lab::cmd_convergence(opts);
      emit(rows, f.out);
      return exit_code(rows);
    }
    if (*cond) {
      const auto rows = mdrk::lab::cmd_conditioning(opts);
      emit(rows, f.out);
      return exit_code(rows);
    }
    const auto res = mdrk::lab::cmd_integrate(opts);
    emit({res.record}, f.out);
    const char* prefix = f.out.empty() ? "# " : "";
    std::printf("%sfinal state:", prefix);
    for (Eigen::Index i = 0; i < res.y_final.size(); ++i) std::printf(" %.15g", res.y_final(i));
    std::printf("\n%siterations per step:", prefix);
    for (int it : res.iterations_per_step) std::printf(" %d", it);
    std::printf("\n");
    return res.record.converged ? 0 : 1;
  } catch (const mdrk::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const mdrk::MissingCapability& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
