#include "mdrk/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace mdrk::lab {
namespace {

namespace fs = std::filesystem;

const char* kHeader = "method,epsilon,dt,n_steps,l2_error,eoc,n_iter_total,mean_cond1,eo_eps,converged";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string hexnum(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

/// Runs f(i) for i in [0, n), concurrently when requested; results keep index order.
template <class F>
auto parallel_map(std::size_t n, bool parallel, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out;
  out.reserve(n);
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
    return out;
  }
  const std::size_t width = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::vector<std::future<R>> pending;
  for (std::size_t start = 0; start < n; start += width) {
    pending.clear();
    for (std::size_t i = start; i < std::min(n, start + width); ++i) {
      pending.push_back(std::async(std::launch::async, f, i));
    }
    for (auto& p : pending) out.push_back(p.get());
  }
  return out;
}

std::vector<int> default_convergence_steps() { return {4, 8, 16, 32, 64, 128, 256}; }

double error_norm(const Vector& a, const Vector& b) { return (a - b).norm(); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_opt(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return std::stod(cell);
}

}  // namespace

MethodSpec make_spec(const LabOptions& opts) {
  return MethodSpec{builtin_tableau(opts.scheme), opts.strategy, opts.formulation, opts.coupling, opts.newton,
                    opts.halfwidth};
}

FluxModel make_model(const LabOptions& opts, double epsilon) {
  return problems::by_name(opts.problem, epsilon, opts.lambda);
}

std::string cache_directory(const LabOptions& opts) {
  if (!opts.cache_dir.empty()) return opts.cache_dir;
  if (const char* env = std::getenv("MDRK_CACHE_DIR"); env && *env) return env;
  return (fs::temp_directory_path() / "mdrk-lab-cache").string();
}

Vector reference_solution(const LabOptions& opts, const FluxModel& model, double t_end, int n_ref) {
  if (model.has_reference()) return model.reference(t_end);
  if (!opts.numeric_reference) {
    throw InvalidArgument("problem '" + model.name + "' has no exact reference and the numerical fallback is disabled");
  }

  const std::string key = model.name + " eps=" + hexnum(model.epsilon) + " lambda=" + hexnum(opts.lambda) +
                          " T=" + hexnum(t_end) + " N=" + std::to_string(n_ref) + " HB-I3DRK6-2s/rec/direct";
  char name[160];
  std::snprintf(name, sizeof name, "ref_%s_eps%.6e_T%.6e_N%d.txt", model.name.c_str(), model.epsilon, t_end, n_ref);
  const fs::path dir = cache_directory(opts);
  const fs::path file = dir / name;

  if (std::ifstream in(file); in) {
    std::string stored_key;
    std::getline(in, stored_key);
    if (stored_key == key) {
      Vector y(model.dim);
      std::string token;
      bool ok = true;
      for (int i = 0; i < model.dim && ok; ++i) {
        ok = static_cast<bool>(in >> token);
        if (ok) y(i) = std::strtod(token.c_str(), nullptr);
      }
      if (ok) return y;
    }
  }

  const MethodSpec spec{builtin_tableau("HB-I3DRK6-2s"), DerivKind::Rec, Formulation::Direct, Coupling::DIMDRK,
                        opts.newton, 0};
  const Vector y = integrate(spec, model, t_end, n_ref).y_final;

  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = file.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  if (std::ofstream out(tmp); out) {
    out << key << '\n';
    for (int i = 0; i < model.dim; ++i) out << hexnum(y(i)) << '\n';
    out.close();
    fs::rename(tmp, file, ec);
  }
  return y;
}

double eoc(double err_coarse, double err_fine, int n_coarse, int n_fine) {
  return std::log2(err_coarse / err_fine) / std::log2(static_cast<double>(n_fine) / n_coarse);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least_squares_slope needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InvalidArgument("least_squares_slope needs distinct abscissae");
  return sxy / sxx;
}

std::vector<RunRecord> cmd_convergence(const LabOptions& opts) {
  const auto steps = opts.n_steps.empty() ? default_convergence_steps() : opts.n_steps;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) throw InvalidArgument("step counts must be strictly increasing");
  }
  if (steps.empty() || steps.front() < 1) throw InvalidArgument("step counts must be positive");
  const double epsilon = opts.epsilons.empty() ? 1.0 : opts.epsilons.front();
  const FluxModel model = make_model(opts, epsilon);
  const double t_end = opts.t_end.value_or(model.t_end);
  const MethodSpec spec = make_spec(opts);
  check_spec(spec, model);

  const Vector ref = reference_solution(opts, model, t_end, 64 * steps.back());
  auto rows = parallel_map(steps.size(), opts.parallel, [&](std::size_t i) {
    RunRecord rec;
    rec.method = spec.id();
    rec.epsilon = epsilon;
    rec.n_steps = steps[i];
    rec.dt = t_end / steps[i];
    try {
      const auto res = integrate(spec, model, t_end, steps[i]);
      rec.l2_error = error_norm(res.y_final, ref);
      rec.n_iter_total = res.stats.n_iter_total;
      if (std::isfinite(res.stats.mean_cond1)) rec.mean_cond1 = res.stats.mean_cond1;
    } catch (const SolveFailure& failure) {
      rec.converged = false;
      rec.n_iter_total = failure.completed.n_iter_total + failure.trace.n_iter();
    }
    return rec;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (a.l2_error && b.l2_error && *a.l2_error > 0.0 && *b.l2_error > 0.0) {
      rows[i].eoc = eoc(*a.l2_error, *b.l2_error, a.n_steps, b.n_steps);
    }
  }
  return rows;
}

std::vector<RunRecord> cmd_conditioning(const LabOptions& opts) {
  if (opts.epsilons.empty()) throw InvalidArgument("conditioning sweep needs at least one epsilon");
  const int n = opts.n_steps.empty() ? 1 : opts.n_steps.front();
  const double t_end = opts.t_end.value_or(1.25);
  const MethodSpec spec = make_spec(opts);
  check_spec(spec, make_model(opts, opts.epsilons.front()));

  auto rows = parallel_map(opts.epsilons.size(), opts.parallel, [&](std::size_t i) {
    const FluxModel model = make_model(opts, opts.epsilons[i]);
    RunRecord rec;
    rec.method = spec.id();
    rec.epsilon = opts.epsilons[i];
    rec.n_steps = n;
    rec.dt = t_end / n;
    try {
      const auto res = integrate(spec, model, t_end, n);
      rec.n_iter_total = res.stats.n_iter_total;
      if (std::isfinite(res.stats.mean_cond1)) rec.mean_cond1 = res.stats.mean_cond1;
      if (model.has_reference()) rec.l2_error = error_norm(res.y_final, model.reference(t_end));
    } catch (const SolveFailure& failure) {
      rec.converged = false;
      rec.n_iter_total = failure.completed.n_iter_total + failure.trace.n_iter();
      if (const auto* mon = failure.trace.monitored(); mon && !mon->cond1.empty()) rec.mean_cond1 = mon->mean_cond1;
    }
    return rec;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].mean_cond1 && rows[i].mean_cond1) {
      rows[i].eo_eps = empirical_order_eps({{rows[i - 1].epsilon, *rows[i - 1].mean_cond1},
                                            {rows[i].epsilon, *rows[i].mean_cond1}})
                           .front();
    }
  }
  return rows;
}

IntegrateOutput cmd_integrate(const LabOptions& opts) {
  const double epsilon = opts.epsilons.empty() ? 1.0 : opts.epsilons.front();
  const FluxModel model = make_model(opts, epsilon);
  const int n = opts.n_steps.empty() ? 1 : opts.n_steps.front();
  const double t_end = opts.t_end.value_or(model.t_end);
  const MethodSpec spec = make_spec(opts);

  IntegrateOutput out;
  out.record.method = spec.id();
  out.record.epsilon = epsilon;
  out.record.n_steps = n;
  out.record.dt = t_end / n;
  try {
    const auto res = integrate(spec, model, t_end, n);
    out.y_final = res.y_final;
    out.iterations_per_step = res.stats.iterations_per_step;
    out.record.n_iter_total = res.stats.n_iter_total;
    if (std::isfinite(res.stats.mean_cond1)) out.record.mean_cond1 = res.stats.mean_cond1;
    if (model.has_reference()) out.record.l2_error = error_norm(res.y_final, model.reference(t_end));
  } catch (const SolveFailure& failure) {
    out.record.converged = false;
    out.iterations_per_step = failure.completed.iterations_per_step;
    out.iterations_per_step.push_back(failure.trace.n_iter());
    out.record.n_iter_total = failure.completed.n_iter_total + failure.trace.n_iter();
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& rows) {
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << num(r.epsilon) << ',' << num(r.dt) << ',' << r.n_steps << ',' << opt(r.l2_error)
        << ',' << opt(r.eoc) << ',' << r.n_iter_total << ',' << opt(r.mean_cond1) << ',' << opt(r.eo_eps) << ','
        << (r.converged ? "true" : "false") << '\n';
  }
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw InvalidArgument("CSV header does not match the run-record schema");
  std::vector<RunRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != 10) throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " fields, expected 10");
    RunRecord r;
    r.method = cells[0];
    r.epsilon = std::stod(cells[1]);
    r.dt = std::stod(cells[2]);
    r.n_steps = std::stoi(cells[3]);
    r.l2_error = parse_opt(cells[4]);
    r.eoc = parse_opt(cells[5]);
    r.n_iter_total = std::stol(cells[6]);
    r.mean_cond1 = parse_opt(cells[7]);
    r.eo_eps = parse_opt(cells[8]);
    r.converged = cells[9] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_svg(const std::vector<RunRecord>& rows, const std::string& title) {
  std::map<double, int> distinct_dt;
  for (const auto& r : rows) distinct_dt[r.dt]++;
  const bool convergence = distinct_dt.size() > 1;

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& r : rows) {
    const auto yv = convergence ? r.l2_error : r.mean_cond1;
    const double xv = convergence ? r.dt : r.epsilon;
    if (yv && *yv > 0.0 && xv > 0.0) series[r.method].emplace_back(std::log10(xv), std::log10(*yv));
  }

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& [name, pts] : series) {
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (series.empty()) x0 = -1, x1 = 0, y0 = -1, y1 = 0;
  x0 = std::floor(x0), x1 = std::ceil(x1), y0 = std::floor(y0), y1 = std::ceil(y1);
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;

  const double w = 720, h = 480, ml = 80, mr = 220, mt = 40, mb = 60;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };

  std::ostringstream svg;
  char buf[256];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) svg << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                ml, mt, w - ml - mr, h - mt - mb);
  svg << buf;
  for (double x = x0; x <= x1 + 1e-9; x += 1) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%g\" x2=\"%.1f\" y2=\"%g\" stroke=\"#ddd\"/><text x=\"%.1f\" y=\"%g\" "
                  "text-anchor=\"middle\">1e%d</text>\n",
                  px(x), mt, px(x), h - mb, px(x), h - mb + 18, static_cast<int>(x));
    svg << buf;
  }
  for (double y = y0; y <= y1 + 1e-9; y += 1) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%.1f\" x2=\"%g\" y2=\"%.1f\" stroke=\"#ddd\"/><text x=\"%g\" y=\"%.1f\" "
                  "text-anchor=\"end\">1e%d</text>\n",
                  ml, py(y), w - mr, py(y), ml - 6, py(y) + 4, static_cast<int>(y));
    svg << buf;
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 16 << "\" text-anchor=\"middle\">"
      << (convergence ? "dt" : "epsilon") << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (mt + h - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (mt + h - mb) / 2 << ")\">" << (convergence ? "l2 error" : "mean cond1") << "</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  int idx = 0;
  for (const auto& [name, pts] : series) {
    const char* color = colors[idx % 7];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(x), py(y));
      svg << buf;
    }
    svg << "\"/>\n";
    for (const auto& [x, y] : pts) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n", px(x), py(y), color);
      svg << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", w - mr + 10,
                  mt + 16.0 * (idx + 1), color, name.c_str());
    svg << buf;
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mdrk::lab
