#include "commands.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "chaplygin/parallel.hpp"
#include "csv.hpp"

namespace chaplygin::cli {

using nlohmann::json;

namespace {

std::ostream& out_of(const CommandContext& ctx) { return ctx.out ? *ctx.out : std::cout; }
std::ostream& err_of(const CommandContext& ctx) { return ctx.err ? *ctx.err : std::cerr; }

void require_in_chart(const SystemDefinition& sys, const ReducedState& st) {
  if (!sys.domain.contains(st.s)) {
    throw PreconditionFailure(sys.label + ": initial shape point outside the chart (" +
                              sys.domain.description + ")");
  }
}

std::vector<double> liouville_channel(const SystemDefinition& sys, const Trajectory& traj,
                                      unsigned threads) {
  std::vector<double> out(traj.samples.size(), 0.0);
  parallel_for(out.size(), threads, [&](std::size_t k) {
    try {
      out[k] = liouville_residual(sys, traj.samples[k].state);
    } catch (const ChartFloorViolation&) {
      // The divergence stencil reaches past the chart floor.
      out[k] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return out;
}

double max_energy_deviation(const Trajectory& traj) {
  double m = 0.0;
  for (const auto& s : traj.samples) m = std::max(m, std::abs(s.H - traj.samples.front().H));
  return m;
}

void ensure_parent(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void write_json(const std::filesystem::path& p, const json& doc) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << doc.dump(2) << '\n';
}

std::string integrator_footer(const Trajectory& traj) {
  std::ostringstream os;
  os << "integrator: " << traj.integrator << " step_or_tol=" << format_number(traj.step_or_tol);
  return os.str();
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json grid_table(const SampleGrid& grid, const std::vector<double>& values, const char* name) {
  json cols = json::array();
  for (Index d = 0; d < grid.dim(); ++d) cols.push_back("s" + std::to_string(d + 1));
  cols.push_back(name);
  json rows = json::array();
  for (Index k = 0; k < grid.size(); ++k) {
    json row = vec_json(grid.point(k));
    row.push_back(values[static_cast<std::size_t>(k)]);
    rows.push_back(std::move(row));
  }
  return json{{"columns", cols}, {"rows", rows}, {"pinned_at", vec_json(grid.point(Index{0}))}};
}

json grid_json(const SampleGrid& grid) {
  json axes = json::array();
  for (const auto& a : grid.axes) axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"points", a.points}});
  return axes;
}

void require_grid_in_chart(const SystemDefinition& sys, const SampleGrid& grid) {
  for (Index k = 0; k < grid.size(); ++k) {
    if (!sys.domain.contains(grid.point(k))) {
      throw PreconditionFailure("diagnostics grid node " + std::to_string(k) +
                                " lies outside the chart (" + sys.domain.description + ")");
    }
  }
}

DiagnosticsOptions diag_options(const DiagnosticsSpec& ds, const CommandContext& ctx) {
  DiagnosticsOptions o;
  o.tol = ds.tol;
  o.threads = ctx.threads;
  return o;
}

// Least-squares slope of y against x.
double trend(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const CommandContext& ctx) {
  const SystemDefinition& sys = *cfg.system;
  const ReducedState& st0 = *cfg.initial_state;
  require_in_chart(sys, st0);

  IntegrateOptions io;
  io.method = cfg.integrator.method;
  io.dt = cfg.integrator.dt;
  io.tol = cfg.integrator.tol;
  io.sample_stride = cfg.integrator.sample_stride;

  const auto& path = *cfg.output.trajectory;
  ensure_parent(path);
  Trajectory traj;
  std::vector<std::string> footer{"system: " + sys.label};
  int code = kExitOk;
  try {
    traj = integrate(sys, st0, cfg.integrator.t_end, io);
  } catch (const DomainExit& e) {
    traj = e.partial();
    footer.push_back(std::string("domain exit: ") + e.what());
    code = kExitDomain;
  }
  footer.push_back(integrator_footer(traj));
  write_trajectory_csv(path, traj, liouville_channel(sys, traj, ctx.threads), false, footer);

  out_of(ctx) << "simulate: " << traj.samples.size() << " samples written to " << path.string()
              << ", max |H - H0| = " << format_number(max_energy_deviation(traj)) << '\n';
  if (code == kExitDomain) err_of(ctx) << footer[1] << '\n';
  return code;
}

int cmd_diagnose(const RunConfig& cfg, const CommandContext& ctx) {
  const SystemDefinition& sys = *cfg.system;
  const DiagnosticsSpec& ds = *cfg.diagnostics;
  require_grid_in_chart(sys, ds.grid);
  const DiagnosticsOptions opts = diag_options(ds, ctx);
  const auto states = sample_states(ds.grid, ds.samples, ctx.seed, ds.p_scale);
  const DiagnosticsReport rep = diagnose(sys, ds.grid, states, opts);

  json doc;
  doc["system"] = sys.label;
  doc["shape_dim"] = sys.shape_dim;
  doc["tolerance"] = ds.tol;
  doc["seed"] = ctx.seed;
  doc["grid"] = grid_json(ds.grid);
  doc["theta_exact"] = rep.theta.is_exact;
  doc["curl_residual_max"] = rep.theta.curl_residual_max;
  doc["loop_residual_max"] = rep.theta.loop_residual_max;
  doc["sigma_table"] =
      rep.theta.sigma_samples ? grid_table(ds.grid, *rep.theta.sigma_samples, "sigma") : json(nullptr);
  doc["phi_simple"] = rep.phi.is_phi_simple;
  doc["phi_table"] = rep.phi.is_phi_simple && rep.phi.phi_samples
                         ? grid_table(ds.grid, *rep.phi.phi_samples, "phi")
                         : json(nullptr);
  doc["pattern_residual_max"] = rep.phi.pattern_residual_max;
  doc["pattern_test_vacuous"] = rep.phi.pattern_test_vacuous;
  doc["consistency_residual_max"] = rep.phi.consistency_residual_max;
  doc["phi_gradient_curl_max"] = rep.phi.gradient_exactness.curl_residual_max;
  doc["liouville_residual_stats"] = {{"max_abs", rep.liouville.max_abs},
                                     {"mean_abs", rep.liouville.mean_abs},
                                     {"rms", rep.liouville.rms},
                                     {"count", rep.liouville.count}};
  doc["conformal_residual_max"] = rep.conformal_residual_max;
  write_json(*cfg.output.report, doc);

  out_of(ctx) << "diagnose: theta_exact=" << (rep.theta.is_exact ? "true" : "false")
              << " phi_simple=" << (rep.phi.is_phi_simple ? "true" : "false")
              << " report written to " << cfg.output.report->string() << '\n';
  return kExitOk;
}

int cmd_hamiltonise(const RunConfig& cfg, const CommandContext& ctx) {
  const SystemDefinition& sys = *cfg.system;
  const ReducedState& st0 = *cfg.initial_state;
  const HamiltoniseSpec& hs = cfg.hamiltonise;
  require_in_chart(sys, st0);

  PhiFunction phi;
  std::string phi_label;
  switch (hs.source) {
    case PhiSource::kAuto: {
      const DiagnosticsSpec& ds = *cfg.diagnostics;
      require_grid_in_chart(sys, ds.grid);
      const DiagnosticsOptions opts = diag_options(ds, ctx);
      const PhiSimpleReport rep = detect_phi_simple(sys, ds.grid, opts);
      if (!rep.is_phi_simple) {
        std::ostringstream os;
        os << sys.label << " is not phi-simple on the diagnostics grid: pattern residual "
           << format_number(rep.pattern_residual_max) << ", consistency residual "
           << format_number(rep.consistency_residual_max) << ", gradient curl residual "
           << format_number(rep.gradient_exactness.curl_residual_max) << " (tol "
           << format_number(ds.tol) << ")";
        throw PreconditionFailure(os.str());
      }
      // Anchored at the initial point: shorter quadrature paths along the run.
      phi = reconstructed_phi(sys, st0.s, opts);
      phi_label = "auto";
      break;
    }
    case PhiSource::kBuiltin:
      if (!sys.known_phi) {
        throw PreconditionFailure(sys.label + " has no builtin phi: it is not phi-simple");
      }
      phi = PhiFunction{*sys.known_phi, std::nullopt};
      phi_label = "builtin";
      break;
    case PhiSource::kExpression:
      phi = PhiFunction{shape_expression(cfg.system_name, sys.shape_dim, hs.expression), std::nullopt};
      phi_label = "expression: " + hs.expression;
      break;
  }

  const HamiltonisedSystem hsys = hamiltonise(sys, phi);
  SymplecticOptions so;
  so.dtau = hs.dtau;
  so.sample_stride = hs.sample_stride;
  so.t_stop = hs.t_end;
  const double tau_end = hs.tau_end.value_or(1e9 * hs.dtau);

  const auto& path = *cfg.output.trajectory;
  ensure_parent(path);
  std::vector<std::string> footer{"system: " + sys.label, "phi: " + phi_label};
  Trajectory traj;
  int code = kExitOk;
  try {
    traj = integrate_symplectic(hsys, st0, tau_end, so);
  } catch (const DomainExit& e) {
    traj = e.partial();
    footer.push_back(std::string("domain exit: ") + e.what());
    code = kExitDomain;
  }
  footer.push_back(integrator_footer(traj));
  write_trajectory_csv(path, traj, liouville_channel(sys, traj, ctx.threads), true, footer);
  if (code == kExitDomain) {
    err_of(ctx) << footer[2] << '\n';
    return code;
  }

  // Reference: adaptive rk45 on the original field in physical time.
  const double t_last = traj.samples.back().t;
  const double t_cmp = std::min(hs.t_end, t_last);
  IntegrateOptions ref_opts;
  ref_opts.method = Method::kRk45;
  ref_opts.tol = hs.reference_tol;
  const Trajectory ref = integrate(sys, st0, t_last, ref_opts);

  double max_dev = 0.0;
  for (const auto& smp : traj.samples) {
    const Vec d = smp.state.packed() - state_at_time(sys, ref, smp.t).packed();
    max_dev = std::max(max_dev, d.lpNorm<Eigen::Infinity>());
  }
  const double dev_end = (state_at_time(sys, traj, t_cmp).packed() -
                          state_at_time(sys, ref, t_cmp).packed())
                             .lpNorm<Eigen::Infinity>();

  std::vector<double> taus, dH;
  for (const auto& smp : traj.samples) {
    taus.push_back(smp.tau.value_or(0.0));
    dH.push_back(smp.H - traj.samples.front().H);
  }
  const double conformal0 =
      conformal_closedness_residual(sys, phi, st0).cwiseAbs().maxCoeff();

  json doc;
  doc["system"] = sys.label;
  doc["phi_source"] = phi_label;
  doc["dtau"] = hs.dtau;
  doc["tau_end"] = traj.samples.back().tau.value_or(0.0);
  doc["t_end"] = t_last;
  doc["samples"] = traj.samples.size();
  doc["reference"] = {{"integrator", "rk45"}, {"tol", hs.reference_tol}, {"samples", ref.samples.size()}};
  doc["max_state_deviation"] = max_dev;
  doc["state_deviation_at_t_end"] = dev_end;
  doc["compared_at_t"] = t_cmp;
  doc["energy_drift"] = {{"max_abs", max_energy_deviation(traj)},
                         {"final", dH.back()},
                         {"trend_per_tau", trend(taus, dH)}};
  doc["conformal_residual_at_initial_state"] = conformal0;

  std::filesystem::path summary = cfg.output.report.value_or(
      std::filesystem::path(path).replace_extension(".summary.json"));
  write_json(summary, doc);

  out_of(ctx) << "hamiltonise: " << traj.samples.size() << " samples written to " << path.string()
              << ", state deviation at t=" << format_number(t_cmp) << ": "
              << format_number(dev_end) << ", summary " << summary.string() << '\n';
  return kExitOk;
}

int cmd_emit_plot(const RunConfig& cfg, const CommandContext& ctx) {
  const std::filesystem::path csv_path = *cfg.output.trajectory;
  const CsvTable table = read_csv(csv_path);
  const long t_col = table.column("t");
  const long h_col = table.column("H");
  if (t_col < 0) throw CsvError(csv_path.string() + ": no t column");
  if (h_col < 0) throw CsvError(csv_path.string() + ": no H column");
  if (table.rows.empty()) throw CsvError(csv_path.string() + ": empty trajectory");

  const std::filesystem::path script =
      cfg.output.plot.value_or(std::filesystem::path(csv_path.string() + ".gp"));
  ensure_parent(script);
  const auto script_dir = std::filesystem::absolute(script).parent_path();
  const auto rel = std::filesystem::relative(std::filesystem::absolute(csv_path), script_dir);

  std::vector<std::pair<long, std::string>> shape_cols, mom_cols;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const std::string& c = table.columns[i];
    if (c.size() > 1 && c[0] == 's' && std::isdigit(static_cast<unsigned char>(c[1]))) {
      shape_cols.emplace_back(static_cast<long>(i), c);
    } else if (c.size() > 1 && c[0] == 'p' && std::isdigit(static_cast<unsigned char>(c[1]))) {
      mom_cols.emplace_back(static_cast<long>(i), c);
    }
  }
  auto plot_line = [&](const std::vector<std::pair<long, std::string>>& cols) {
    std::string line = "plot ";
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) line += ", \\\n     ";
      line += (i ? "''" : std::string("datafile")) + " using " + std::to_string(t_col + 1) + ":" +
              std::to_string(cols[i].first + 1) + " with lines title '" + cols[i].second + "'";
    }
    return line + "\n";
  };

  std::ofstream out(script, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + script.string() + " for writing");
  out << "# gnuplot script for " << csv_path.filename().string() << "\n"
      << "# columns: ";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n# run from this directory: gnuplot " << script.filename().string() << "\n\n"
      << "datafile = '" << rel.generic_string() << "'\n"
      << "H0 = " << format_number(table.rows.front()[static_cast<std::size_t>(h_col)]) << "\n"
      << "set datafile separator ','\n"
      << "set datafile commentschars '#'\n"
      << "set key autotitle columnhead\n"
      << "set terminal pngcairo size 1400,1000\n"
      << "set output '" << script.stem().string() << ".png'\n"
      << "set multiplot layout 2,2\n"
      << "set xlabel 't'\n\n"
      << "set title 'shape coordinates'\n"
      << plot_line(shape_cols) << "\n"
      << "set title 'momenta'\n"
      << plot_line(mom_cols) << "\n"
      << "set title 'energy deviation H - H(0)'\n"
      << "plot datafile using " << t_col + 1 << ":($" << h_col + 1
      << " - H0) with lines title 'H - H0'\n\n";
  const long l_col = table.column("liouville_residual");
  if (l_col >= 0) {
    out << "set title 'Liouville residual'\n"
        << "plot datafile using " << t_col + 1 << ":" << l_col + 1
        << " with lines title 'liouville_residual'\n";
  }
  out << "unset multiplot\n";
  const long tau_col = table.column("tau");
  if (tau_col >= 0) {
    out << "\nset output '" << script.stem().string() << "_time.png'\n"
        << "set title 'physical time against tau'\n"
        << "set xlabel 'tau'\n"
        << "plot datafile using " << tau_col + 1 << ":" << t_col + 1 << " with lines title 't'\n";
  }
  if (!out) throw std::runtime_error("write failed for " + script.string());

  out_of(ctx) << "emit-plot: " << table.columns.size() << " columns, " << table.rows.size()
              << " rows; script written to " << script.string() << '\n';
  return kExitOk;
}

int run_command(Command cmd, const std::filesystem::path& config, const CommandContext& ctx) {
  try {
    const RunConfig cfg = load_config(config, cmd);
    switch (cmd) {
      case Command::kSimulate: return cmd_simulate(cfg, ctx);
      case Command::kDiagnose: return cmd_diagnose(cfg, ctx);
      case Command::kHamiltonise: return cmd_hamiltonise(cfg, ctx);
      case Command::kEmitPlot: return cmd_emit_plot(cfg, ctx);
    }
    return kExitFailure;
  } catch (const ConfigError& e) {
    err_of(ctx) << e.what() << '\n';
    return kExitConfig;
  } catch (const CsvError& e) {
    err_of(ctx) << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainExit& e) {
    err_of(ctx) << "domain exit: " << e.what() << '\n';
    return kExitDomain;
  } catch (const PreconditionFailure& e) {
    err_of(ctx) << "precondition failed: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const Error& e) {
    err_of(ctx) << "precondition failed: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace chaplygin::cli
