#include "tumor_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <tumor_sde/errors.hpp>
#include <tumor_sde/linearize.hpp>
#include <tumor_sde/lyapunov.hpp>
#include <tumor_sde/models.hpp>
#include <tumor_sde/simulate.hpp>
#include <tumor_sde/stability.hpp>

#include "tumor_cli/manifest.hpp"
#include "tumor_cli/svg.hpp"

namespace tumor_cli {

using namespace tumor_sde;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Equilibrium select_equilibrium(const ModelDefinition& model, const std::string& selector) {
  const auto eqs = find_equilibria(model);
  if (selector == "P1" || selector == "P2") {
    const EquilibriumLabel want =
        selector == "P1" ? EquilibriumLabel::P1 : EquilibriumLabel::P2;
    for (const auto& eq : eqs)
      if (eq.label == want) return eq;
    throw ConfigError("equilibrium " + selector + " does not exist for model '" + model.name +
                      "' with these parameters");
  }
  const std::size_t index = std::stoull(selector);
  if (index >= eqs.size())
    throw ConfigError("equilibrium index " + selector + " out of range; the model has " +
                      std::to_string(eqs.size()) + " equilibria");
  return eqs[index];
}

LinearSDE linear_system_of(const ModelDefinition& model, const Equilibrium& eq,
                           const NoiseBlock& noise) {
  if (noise.kind == NoiseKind::Diagonal)
    return make_diagonal_system(model, eq, DiagonalNoiseSpec{noise.sigma1, noise.sigma2});
  return linearize_at(model, eq, noise.matrix());
}

std::string run_kind_tag(const NoiseBlock& noise, bool linearized) {
  if (noise.matrix().zero()) return "ODE";
  return linearized ? "linear SDE" : "SDE";
}

// The renormalized-radius estimator is most accurate under the cross-term
// scheme, so the exponent commands always use it.
SimConfig mc_config(double h, std::size_t steps) {
  SimConfig cfg;
  cfg.h = h;
  cfg.steps = steps;
  cfg.scheme = Scheme::Euler2Cross;
  return cfg;
}

std::string describe(const LyapunovResult& r) {
  std::string line = std::string(to_string(r.method)) + "  lambda = " + fmt(r.lambda);
  if (r.method == LyapunovMethod::MonteCarlo && r.std_error > 0.0)
    line += "  (std error " + fmt6(r.std_error) + ")";
  if (r.fallback_used) line += "  [fallback]";
  if (!r.note.empty()) line += "  # " + r.note;
  return line;
}

int cmd_equilibria(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = make_model(cfg.model, cfg.overrides);
  const auto eqs = find_equilibria(model);

  ManifestWriter manifest(cfg.out_dir);
  std::ostringstream csv;
  csv << "label,x,y,residual,eig_re1,eig_re2\n";
  for (const auto& eq : eqs) {
    const auto eig = jacobian_at(model, eq.state).eig_real_parts();
    csv << to_string(eq.label) << ',' << fmt(eq.state.x) << ',' << fmt(eq.state.y) << ','
        << fmt(eq.residual) << ',' << fmt(eig.first) << ',' << fmt(eig.second) << '\n';
    out << to_string(eq.label) << "  (" << fmt(eq.state.x) << ", " << fmt(eq.state.y)
        << ")  residual " << fmt6(eq.residual) << "  eig re (" << fmt6(eig.first) << ", "
        << fmt6(eig.second) << ")\n";
  }
  if (!model.experimental) {
    bool has_p2 = false;
    for (const auto& eq : eqs) has_p2 = has_p2 || eq.label == EquilibriumLabel::P2;
    if (!has_p2) {
      err << "warning: interior equilibrium (P2) absent for these parameters\n";
      manifest.note("interior equilibrium (P2) absent for these parameters");
    }
  }

  manifest.emit("equilibria.csv", csv.str());
  manifest.emit("resolved.ini", render_ini(cfg));
  manifest.write_manifest(to_string(cfg.command), cfg.sim.seed, render_ini(cfg));
  out << "wrote equilibria.csv (" << eqs.size() << " rows) to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = make_model(cfg.model, cfg.overrides);
  const auto anchor = select_equilibrium(model, cfg.equilibrium);

  SimConfig sim;
  sim.h = cfg.sim.h;
  sim.steps = cfg.sim.steps;
  sim.scheme = cfg.sim.scheme;
  const Vec2 start = cfg.sim.initial
                         ? *cfg.sim.initial
                         : Vec2{anchor.state.x + 0.1, anchor.state.y + 0.1};

  Trajectory traj;
  if (cfg.sim.linearized) {
    const LinearSDE lin = linear_system_of(model, anchor, cfg.noise);
    sim.initial = start - anchor.state;
    traj = simulate(make_system(lin), sim, cfg.sim.seed);
    for (Vec2& s : traj.states) s = s + anchor.state;
  } else if (cfg.noise.kind == NoiseKind::Diagonal) {
    sim.initial = start;
    traj = simulate(make_system(model, anchor, DiagonalNoiseSpec{cfg.noise.sigma1,
                                                                 cfg.noise.sigma2}),
                    sim, cfg.sim.seed);
  } else {
    sim.initial = start;
    traj = simulate(make_system(model, make_volatility(cfg.noise.matrix(), anchor)), sim,
                    cfg.sim.seed);
  }

  ManifestWriter manifest(cfg.out_dir);
  if (traj.blew_up) {
    err << "warning: trajectory exceeded the finite-size guard at step " << traj.blowup_index
        << "; output truncated\n";
    manifest.note("trajectory truncated at step " + std::to_string(traj.blowup_index) +
                  " after exceeding the finite-size guard");
  }
  if (cfg.sim.linearized)
    manifest.note("states are the anchor plus the linearized deviation");

  std::ostringstream csv;
  write_trajectory_csv(traj, csv);
  manifest.emit("traj.csv", csv.str());

  const std::string tag = cfg.model + " " + to_string(anchor.label) + " " +
                          run_kind_tag(cfg.noise, cfg.sim.linearized);
  Series xs, ys, phase;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    xs.x.push_back(static_cast<double>(i));
    xs.y.push_back(traj.states[i].x);
    ys.x.push_back(static_cast<double>(i));
    ys.y.push_back(traj.states[i].y);
    phase.x.push_back(traj.states[i].x);
    phase.y.push_back(traj.states[i].y);
  }
  std::ostringstream svg;
  write_line_svg(svg, {xs}, {tag + ": x over steps", "n", "x", false, {}});
  manifest.emit("x_vs_n.svg", svg.str());
  svg.str("");
  write_line_svg(svg, {ys}, {tag + ": y over steps", "n", "y", false, {}});
  manifest.emit("y_vs_n.svg", svg.str());
  svg.str("");
  write_line_svg(svg, {phase}, {tag + ": phase portrait", "x", "y", false, {}});
  manifest.emit("phase.svg", svg.str());

  manifest.emit("resolved.ini", render_ini(cfg));
  manifest.write_manifest(to_string(cfg.command), cfg.sim.seed, render_ini(cfg));

  const Vec2& last = traj.states.back();
  out << tag << ": " << traj.states.size() - 1 << " steps, scheme "
      << to_string(cfg.sim.scheme) << ", seed " << cfg.sim.seed << "\n";
  out << "final state (" << fmt6(last.x) << ", " << fmt6(last.y) << ")"
      << (traj.blew_up ? "  [truncated]" : "") << "\n";
  out << "wrote traj.csv, x_vs_n.svg, y_vs_n.svg, phase.svg to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_lyapunov(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = make_model(cfg.model, cfg.overrides);
  const auto anchor = select_equilibrium(model, cfg.equilibrium);
  const LinearSDE lin = linear_system_of(model, anchor, cfg.noise);
  const LyapunovBlock& ly = cfg.lyapunov;

  ManifestWriter manifest(cfg.out_dir);
  std::ostringstream csv;
  csv << "method,lambda,std_error,sample_count,fallback\n";
  out << cfg.model << " " << to_string(anchor.label) << " top Lyapunov exponent\n";
  for (LyapunovMethod method : ly.methods) {
    const LyapunovResult r =
        top_lyapunov(lin, method, GridOptions{ly.grid_n, 0.0, false},
                     mc_config(ly.mc_h, ly.mc_steps), ly.mc_paths, cfg.sim.seed);
    out << "  " << describe(r) << "\n";
    csv << to_string(r.method) << ',' << fmt(r.lambda) << ',' << fmt(r.std_error) << ','
        << r.sample_count << ',' << (r.fallback_used ? 1 : 0) << '\n';
    if (r.fallback_used) manifest.note(std::string(to_string(method)) + ": " + r.note);
  }
  manifest.emit("lyapunov.csv", csv.str());

  if (ly.density) {
    // Density output follows the first density-capable requested method.
    PhaseDensity density;
    bool use_grid = false;
    for (LyapunovMethod m : ly.methods) {
      if (m == LyapunovMethod::ClosedForm) break;
      if (m == LyapunovMethod::GridScheme) {
        use_grid = true;
        break;
      }
    }
    density = use_grid ? stationary_density_grid(lin, GridOptions{ly.grid_n, 0.0, false})
                       : stationary_density_closed(lin, ly.grid_n);
    std::ostringstream dcsv;
    write_density_csv(density, dcsv);
    manifest.emit("density.csv", dcsv.str());
    out << "wrote density.csv (" << (use_grid ? "grid" : "closed-form") << ", "
        << density.theta.size() << " nodes)\n";
  }

  manifest.emit("resolved.ini", render_ini(cfg));
  manifest.write_manifest(to_string(cfg.command), cfg.sim.seed, render_ini(cfg));
  (void)err;
  return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = make_model(cfg.model, cfg.overrides);
  const auto anchor = select_equilibrium(model, cfg.equilibrium);
  const SweepBlock& sw = cfg.sweep;
  const auto alphas = alpha_range(sw.alpha_min, sw.alpha_max, sw.alpha_step);

  const GridOptions grid{sw.grid_n, 0.0, false};
  const SimConfig mc = mc_config(sw.mc_h, sw.mc_steps);
  const SweepTable table =
      cfg.noise.kind == NoiseKind::Spiral
          ? sweep_alpha(model, anchor, cfg.noise.beta, alphas, sw.method, grid, mc,
                        sw.mc_paths, cfg.sim.seed)
          : sweep_b11(model, anchor, cfg.noise.slopes, alphas, sw.method, grid, mc,
                      sw.mc_paths, cfg.sim.seed);

  std::size_t failed = 0;
  for (const SweepRow& row : table.rows) {
    if (!row.ok) {
      ++failed;
      err << "warning: alpha = " << fmt6(row.alpha) << " failed: " << row.note << "\n";
    }
  }
  if (failed == table.rows.size()) {
    err << "error: every sweep point failed\n";
    return 3;
  }

  ManifestWriter manifest(cfg.out_dir);
  std::ostringstream csv;
  write_sweep_csv(table, csv);
  manifest.emit("sweep.csv", csv.str());

  const auto crossings = sign_changes(table);
  Series curve;
  for (const SweepRow& row : table.rows) {
    if (!row.ok) continue;
    curve.x.push_back(row.alpha);
    curve.y.push_back(row.lambda);
  }
  const std::string family =
      table.family == SweepFamily::Spiral
          ? "spiral beta = " + fmt6(table.beta)
          : "b11 family";
  const std::string title = cfg.model + " " + to_string(anchor.label) +
                            " lambda(alpha), " + family;
  std::ostringstream svg;
  write_line_svg(svg, {curve}, {title, "alpha", "lambda", true, crossings});
  manifest.emit("lambda_vs_alpha.svg", svg.str());

  out << title << "\n";
  out << table.rows.size() << " points";
  if (failed) out << " (" << failed << " failed, see warnings)";
  out << "\n";
  if (crossings.empty()) {
    out << "no sign changes in [" << fmt6(sw.alpha_min) << ", " << fmt6(sw.alpha_max) << "]\n";
    manifest.note("no sign changes");
  } else {
    out << "sign changes (linear interpolation):";
    std::string note = "sign changes at";
    for (double c : crossings) {
      out << " " << fmt6(c);
      note += " " + fmt6(c);
    }
    out << "\n";
    manifest.note(note);
  }
  if (failed)
    manifest.note(std::to_string(failed) + " sweep points failed and were skipped");
  out << "wrote sweep.csv, lambda_vs_alpha.svg to " << cfg.out_dir << "\n";

  manifest.emit("resolved.ini", render_ini(cfg));
  manifest.write_manifest(to_string(cfg.command), cfg.sim.seed, render_ini(cfg));
  return 0;
}

int cmd_stability(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = make_model(cfg.model, cfg.overrides);
  const auto anchor = select_equilibrium(model, cfg.equilibrium);
  const LinearSDE lin = linear_system_of(model, anchor, cfg.noise);

  std::ostringstream report;
  report << "model " << cfg.model << ", equilibrium " << to_string(anchor.label) << " ("
         << fmt6(anchor.state.x) << ", " << fmt6(anchor.state.y) << ")\n";

  if (cfg.model == "bell" && anchor.label == EquilibriumLabel::P2 &&
      cfg.noise.kind == NoiseKind::Diagonal) {
    // The diagonal-quadratic certificate at the interior point sits on its
    // own boundary for any sigma1 > 0; show the numbers rather than hide them.
    const auto cert = bell_certificate(model, cfg.noise.sigma1, cfg.noise.sigma2);
    report << "interior diagonal-noise certificate (cross-cancelling weights):\n";
    report << "  w = (" << fmt6(cert.V.w1) << ", " << fmt6(cert.V.w2) << ")\n";
    report << "  q1 = " << fmt(cert.q1) << "  (equals -w1 sigma1^2 here)\n";
    report << "  q2 = " << fmt(cert.q2) << "\n";
    report << "  cross = " << fmt(cert.cross) << "\n";
    report << "  " << (cert.valid ? "valid" : "invalid") << ": " << cert.reason << "\n";
    const auto printed = bell_certificate(model, cfg.noise.sigma1, cfg.noise.sigma2, 1.0,
                                          RatioMode::AsPrinted);
    report << "  alternate weight ratio: " << (printed.valid ? "valid" : "invalid") << ": "
           << printed.reason << "\n";
  }

  const StabilityVerdict verdict = classify(lin);
  report << stability_report(verdict);

  if (verdict.kind == StabilityKind::Inconclusive && lin.form == NoiseForm::TwoWiener) {
    const LyapunovBlock& ly = cfg.lyapunov;
    const LyapunovResult mc =
        lyapunov_mc(lin, mc_config(ly.mc_h, ly.mc_steps), ly.mc_paths, cfg.sim.seed);
    report << "monte carlo exponent: lambda = " << fmt(mc.lambda) << " (std error "
           << fmt6(mc.std_error) << ", " << mc.sample_count << " paths)\n";
    if (mc.lambda + 3.0 * mc.std_error < 0.0)
      report << "pathwise reading: asymptotically stable (lambda < 0 by more than 3 SE)\n";
    else if (mc.lambda - 3.0 * mc.std_error > 0.0)
      report << "pathwise reading: unstable (lambda > 0 by more than 3 SE)\n";
    else
      report << "pathwise reading: sign not resolved at 3 SE\n";
  }

  ManifestWriter manifest(cfg.out_dir);
  manifest.emit("verdict.txt", report.str());
  manifest.emit("resolved.ini", render_ini(cfg));
  manifest.write_manifest(to_string(cfg.command), cfg.sim.seed, render_ini(cfg));
  out << report.str();
  (void)err;
  return 0;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.command) {
    case Command::Equilibria: return cmd_equilibria(cfg, out, err);
    case Command::Simulate: return cmd_simulate(cfg, out, err);
    case Command::Lyapunov: return cmd_lyapunov(cfg, out, err);
    case Command::Sweep: return cmd_sweep(cfg, out, err);
    case Command::Stability: return cmd_stability(cfg, out, err);
  }
  return 2;
}

}  // namespace tumor_cli
