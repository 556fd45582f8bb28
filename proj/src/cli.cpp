#include "nlh/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>

#include "nlh/csv.hpp"
#include "nlh/effective.hpp"
#include "nlh/errors.hpp"
#include "nlh/homogenize.hpp"
#include "nlh/nonlocal.hpp"

namespace nlh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string output_path(const RunConfig& c, const std::string& suffix) {
  std::error_code ec;
  std::filesystem::create_directories(c.output.dir, ec);
  if (ec) throw IoError("cannot create output directory " + c.output.dir + ": " + ec.message());
  return (std::filesystem::path(c.output.dir) / (c.output.prefix + "_" + suffix + ".csv")).string();
}

double drift_for(const RunConfig& c, const KernelSpec& k) {
  if (c.kernel.sigma != 1.0) return 0.0;
  return drift_vector(k, c.kernel.drift_tol).b;
}

std::shared_ptr<const EffectiveHamiltonian> effective_source(const RunConfig& c) {
  if (!c.cell.table.empty()) return std::make_shared<TableHamiltonian>(load_table_csv(c.cell.table));
  if (c.kernel.sigma > 1.0) {
    return std::make_shared<FormulaHamiltonian>(build_coefficient(c), build_hamiltonian(c));
  }
  throw DomainError("cell.table: an effective table is required when kernel.sigma <= 1");
}

PropertyClaims claims_for(const RunConfig& c) {
  const Profile a = Profile::parse(c.coefficient_a.profile, c.coefficient_a.scale);
  const Profile b = Profile::parse(c.hamiltonian.b, c.hamiltonian.b_scale);
  const Profile f = Profile::parse(c.hamiltonian.f, c.hamiltonian.f_scale);
  return PropertyClaims{b.inf(), f.sup_abs(), a.sup(), c.hamiltonian.m};
}

int cmd_audit(const RunConfig& c, std::ostream& out) {
  const AuditSummary s = run_audits(c);
  for (const auto& line : s.lines) out << line << "\n";
  out << "audit " << (s.pass ? "PASS" : "FAIL") << "\n";
  return s.pass ? exit_ok : exit_validation;
}

int cmd_drift(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.kernel.sigma != 1.0) {
    err << "drift: defined only for kernel.sigma = 1\n";
    return exit_validation;
  }
  const DriftVector d = drift_vector(build_kernel(c), c.kernel.drift_tol);
  out << "b = " << num(d.b) << "\n";
  out << "converged = " << (d.converged ? "true" : "false") << ", residual = " << num(d.residual) << "\n";
  return d.converged ? exit_ok : exit_numerical;
}

int cmd_cell(const RunConfig& c, std::ostream& out) {
  const CellModel model = build_cell_model(c);
  const KernelSpec kernel = build_kernel(c);
  CellParams params;
  params.x = c.cell.x;
  params.p = c.cell.p;
  params.l = c.cell.l;
  params.regime = regime_of(c.kernel.sigma);
  params.drift_b = drift_for(c, kernel);
  const CellConfig cfg = build_cell_config(c);

  CellSolution sol;
  if (c.cell.method == "discount") {
    sol = solve_cell(model, params, cfg);
  } else if (c.cell.method == "longtime") {
    const LongTimeEstimate est = long_time_average(model, params, c.cell.T_max, cfg);
    sol.H_bar = est.H_bar;
    sol.spread = est.error;
  } else {
    sol.H_bar = explicit_formula_above_one(model.a, model.H, params.x, params.p, params.l);
    GridFunction f(cfg.n);
    for (int j = 0; j < cfg.n; ++j) {
      const double y = static_cast<double>(j) / cfg.n;
      f[j] = (sol.H_bar - model.H(params.x, y, params.p)) / model.a(params.x, y) + params.l;
    }
    f += -f.mean();
    sol.psi = spectral_cell_above_one(f, c.kernel.sigma);
    sol.regularity = regularity_audit(sol, params, model);
  }
  const bool have_psi = sol.psi.size() > 0;
  const RegularityReport& r = sol.regularity;
  out << "regime = " << to_string(params.regime) << "\n";
  out << "H_bar = " << num(sol.H_bar) << "\n";
  out << "spread = " << num(sol.spread) << "\n";
  if (have_psi) {
    out << "osc = " << num(r.oscillation) << ", lip = " << num(r.lipschitz)
        << ", flap_sup = " << num(r.flap_sup) << "\n";
  }
  CsvTable t;
  t.comments = config_echo(c);
  t.header = {"x", "p", "l", "sigma", "H_bar", "spread", "osc", "lip", "flap_sup"};
  t.rows.push_back({params.x, params.p, params.l, c.kernel.sigma, sol.H_bar, sol.spread,
                    have_psi ? r.oscillation : kNaN, have_psi ? r.lipschitz : kNaN,
                    have_psi ? r.flap_sup : kNaN});
  write_csv(output_path(c, "cell"), t);
  return exit_ok;
}

int cmd_effective(const RunConfig& c, int threads, std::ostream& out) {
  TabulateOptions opts;
  opts.source = parse_provenance(c.cell.method);
  opts.cell = build_cell_config(c);
  opts.drift_b = drift_for(c, build_kernel(c));
  opts.T_max = c.cell.T_max;
  opts.threads = threads;
  const EffectiveTable table = tabulate(build_cell_model(c), build_axes(c), opts);
  save_table_csv(table, output_path(c, "effective"), config_echo(c));
  const PropertyAudit a = audit_properties(table, claims_for(c));
  out << "nodes = " << table.size() << ", failed = " << table.failed_nodes() << "\n";
  out << "monotonicity_violations = " << a.monotonicity_violations
      << ", worst_l_increase = " << num(a.worst_l_increase) << "\n";
  out << "coercivity_violations = " << a.coercivity_violations
      << ", worst_slack = " << num(a.worst_coercivity_slack) << "\n";
  out << "C_l = " << num(a.C_l) << ", C_x = " << num(a.C_x) << ", C_p = " << num(a.C_p)
      << ", structure_n = " << num(a.structure_n) << "\n";
  if (table.failed_nodes() > 0) return exit_numerical;
  return a.pass ? exit_ok : exit_validation;
}

int cmd_solve(const RunConfig& c, std::ostream& out) {
  ParabolicProblem problem;
  problem.kernel = build_kernel(c);
  problem.u0 = build_u0(c, c.grid.n);
  problem.T = c.grid.T;
  if (c.grid.problem == "oscillating") {
    problem.source = OscillatingSource{c.grid.k, build_coefficient(c), build_hamiltonian(c)};
  } else {
    problem.source = EffectiveSource{effective_source(c)};
  }
  const SolverConfig cfg = build_solver_config(c);
  const Trajectory traj = solve(problem, cfg);
  const auto layer = initial_layer_modulus(traj, problem.u0);

  CsvTable tr;
  tr.comments = config_echo(c);
  tr.header = {"t", "x", "u"};
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    for (int i = 0; i < cfg.n; ++i) {
      tr.rows.push_back({traj.times[j], static_cast<double>(i) / cfg.n, traj.snapshots[j][i]});
    }
  }
  write_csv(output_path(c, "trajectory"), tr);
  CsvTable sm;
  sm.comments = config_echo(c);
  sm.header = {"t", "sup_norm", "initial_layer"};
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    sm.rows.push_back({traj.times[j], traj.sup_norm_track[j], layer[j].value});
  }
  write_csv(output_path(c, "summary"), sm);

  const GridFunction& last = traj.snapshots.back();
  const double bound = max_bound(problem, problem.T);
  out << "steps = " << traj.steps << ", dt_min = " << num(traj.dt_min) << ", dt_max = " << num(traj.dt_max) << "\n";
  out << "sup_norm(T) = " << num(last.sup_norm()) << ", bound = " << num(bound) << "\n";
  out << "oscillation(T) = " << num(last.oscillation()) << ", mean(T) = " << num(last.mean()) << "\n";
  return exit_ok;
}

int cmd_homogenize(const RunConfig& c, int threads, std::ostream& out) {
  SweepProblem problem;
  problem.model = build_cell_model(c);
  problem.kernel = build_kernel(c);
  problem.u0 = build_u0_function(c);
  problem.T = c.grid.T;
  problem.Hbar = effective_source(c);
  problem.drift_b = drift_for(c, problem.kernel);
  SweepConfig cfg;
  cfg.k_list = c.sweep.k_list;
  cfg.points_per_period = c.sweep.points_per_period;
  cfg.n_coarse = c.sweep.n_coarse;
  cfg.records = c.grid.records;
  cfg.cfl_safety = c.grid.cfl_safety;
  cfg.flux = c.hamiltonian.flux == "godunov" ? FluxKind::godunov : FluxKind::lax_friedrichs;
  cfg.image_budget = c.kernel.image_budget;
  cfg.threads = threads;
  cfg.corrector = c.sweep.corrector;
  cfg.cell = build_cell_config(c);
  const SweepReport rep = run_sweep(problem, cfg);

  CsvTable t;
  t.comments = config_echo(c);
  t.header = {"eps", "n", "dt", "error", "rate", "corrector_residual", "seconds"};
  bool all_ok = true;
  for (const auto& e : rep.entries) {
    t.rows.push_back({e.eps, static_cast<long>(e.n), e.dt, e.error, e.rate, e.corrector_residual, e.seconds});
    out << "eps = " << num(e.eps) << ", error = " << num(e.error) << ", rate = " << num(e.rate)
        << ", corrector_residual = " << num(e.corrector_residual);
    if (!e.ok) out << ", FAILED: " << e.failure;
    out << "\n";
    all_ok = all_ok && e.ok;
  }
  write_csv(output_path(c, "sweep"), t);
  if (rep.entries.size() >= 3 && all_ok) {
    const RateFit fit = convergence_rates(rep);
    out << "fitted_rate = " << num(fit.rate) << ", fit_residual = " << num(fit.residual) << "\n";
  }
  return all_ok ? exit_ok : exit_numerical;
}

std::string fraction(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

int cmd_constants(const RunConfig& c, const CliOptions& o, std::ostream& out) {
  const double n = o.n.value_or(1.0);
  const double sigma = o.sigma.value_or(c.kernel.sigma);
  const double m = o.m.value_or(c.hamiltonian.m);
  const HamiltonianSpec h = build_hamiltonian(c);
  const double b0 = o.b0.value_or(h.b0);
  const double C0 = o.C0.value_or(h.C0);
  out << "n = " << num(n) << ", sigma = " << num(sigma) << ", m = " << num(m) << ", b0 = " << num(b0)
      << ", C0 = " << num(C0) << "\n";
  if (sigma <= 1.0) {
    out << "alpha0 = " << num(holder_exponent_alpha0(n, sigma, m)) << "\n";
  } else {
    out << "alpha0 = undefined for sigma > 1\n";
  }
  const double C_grow = growth_bound(h);
  CoercivityCertificate cert = coercivity_constants(m, b0, C0, C_grow, 0.0);
  const double K_small = small_gradient_offset(h, cert.C_tilde);
  cert = coercivity_constants(m, b0, C0, C_grow, K_small);
  if (m == std::round(m) && m >= 2.0 && m <= 30.0) {
    const auto [cm, Cm] = coercivity_rationals(static_cast<int>(m));
    out << "c_m = " << fraction(cm) << " (" << num(cert.c_m) << ")\n";
    out << "C_m = " << fraction(Cm) << " (" << num(cert.C_m) << ")\n";
  } else {
    out << "c_m = " << num(cert.c_m) << "\n";
    out << "C_m = " << num(cert.C_m) << "\n";
  }
  out << "C_tilde = " << num(cert.C_tilde) << ", K = " << num(cert.K) << " (C_grow = " << num(C_grow)
      << ", valid for |p| > " << num(cert.valid_above) << ")\n";
  return exit_ok;
}

}  // namespace

AuditSummary run_audits(const RunConfig& c) {
  AuditSummary s;
  const KernelSpec kernel = build_kernel(c);
  const AuditGrid grid{64, 256, c.kernel.audit_points, 8.0};
  const EllipticityAudit e = audit_ellipticity(build_coefficient(c), kernel, grid);
  s.lines.push_back("ellipticity: " + std::string(e.pass ? "pass" : "FAIL") + ", a0 = " + num(e.a0) +
                    ", normalization_gap = " + num(e.normalization_gap));
  for (const auto& f : e.failures) s.lines.push_back("  " + f);
  if (e.dini_checked) {
    s.lines.push_back("modulus integral: " + std::string(e.dini.finite ? "finite" : "NOT finite") +
                      ", value = " + num(e.dini.value) + ", panels = " + std::to_string(e.dini.panels));
  }
  s.pass = s.pass && e.pass;

  const HamiltonianSpec h = build_hamiltonian(c);
  AuditBudget budget;
  budget.p_max = c.hamiltonian.p_max;
  budget.n_y = c.hamiltonian.samples;
  budget.n_p = c.hamiltonian.samples;
  budget.n_mu = c.hamiltonian.samples;
  const SuperlinearityAudit sl = audit_superlinearity(h, budget);
  s.lines.push_back("superlinearity: " + std::string(sl.pass ? "pass" : "FAIL") +
                    ", worst_slack = " + num(sl.worst_slack) + " at p = " + num(sl.witness_p) +
                    ", mu = " + num(sl.witness_mu));
  s.pass = s.pass && sl.pass;
  const RegularityAudit rg = audit_regularity(h, budget);
  s.lines.push_back("regularity: " + std::string(rg.within_claim ? "pass" : "FAIL") +
                    ", measured L = " + num(rg.L) + ", claimed L = " + num(h.L));
  s.pass = s.pass && rg.within_claim;

  if (c.kernel.sigma == 1.0) {
    const DriftVector d = drift_vector(kernel, c.kernel.drift_tol);
    s.lines.push_back("drift: b = " + num(d.b) + (d.converged ? "" : " (NOT converged)"));
    s.pass = s.pass && d.converged;
  }
  return s;
}

int dispatch(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    ConfigResult parsed;
    if (!opts.config_path.empty()) {
      parsed = parse_config(opts.config_path);
    } else {
      parsed = parse_config_text("");
    }
    if (!parsed.ok()) {
      for (const auto& e : parsed.errors) err << "config error: " << e << "\n";
      return exit_validation;
    }
    RunConfig c = parsed.config;
    if (!opts.out_dir.empty()) c.output.dir = opts.out_dir;
    if (opts.threads < 1) {
      err << "--threads must be at least 1\n";
      return exit_validation;
    }

    const std::string& cmd = opts.command;
    if (cmd == "audit") return cmd_audit(c, out);
    if (cmd == "drift") return cmd_drift(c, out, err);
    if (cmd == "constants") return cmd_constants(c, opts, out);

    const bool gated = cmd == "cell" || cmd == "effective" || cmd == "solve" || cmd == "homogenize";
    if (!gated) {
      err << "unknown command '" << cmd << "'\n";
      return exit_validation;
    }
    const AuditSummary audits = run_audits(c);
    if (!audits.pass) {
      for (const auto& line : audits.lines) err << line << "\n";
      if (!opts.force) {
        err << cmd << ": audits failed; rerun with --force to proceed anyway\n";
        return exit_validation;
      }
      err << cmd << ": proceeding despite failed audits (--force)\n";
    }
    if (cmd == "cell") return cmd_cell(c, out);
    if (cmd == "effective") return cmd_effective(c, opts.threads, out);
    if (cmd == "solve") return cmd_solve(c, out);
    return cmd_homogenize(c, opts.threads, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return exit_io;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what();
    if (e.step() >= 0) err << " (step " << e.step() << ")";
    err << "\n";
    return exit_numerical;
  } catch (const RangeError& e) {
    err << "range error: " << e.what() << "; enlarge the effective table axes\n";
    return exit_validation;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_validation;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical homogenization toolkit for nonlocal Hamilton-Jacobi equations"};
  CliOptions o;
  app.add_option("--config", o.config_path, "Configuration file (section.key = value lines)");
  app.add_option("--out", o.out_dir, "Output directory, overrides output.dir");
  app.add_flag("--force", o.force, "Run audit-gated commands even when audits fail");
  app.add_option("--threads", o.threads, "Worker threads; affects speed only");
  app.require_subcommand(1);
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"audit", "Run all assumption audits"},
      {"drift", "Print the drift vector of a sigma = 1 kernel"},
      {"cell", "Solve one cell problem"},
      {"effective", "Tabulate the effective Hamiltonian"},
      {"solve", "Run one parabolic problem"},
      {"homogenize", "Run an eps sweep"},
      {"constants", "Print the Hoelder exponent and coercivity constants"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&o, name = std::string(name)] { o.command = name; });
    if (std::string(name) == "constants") {
      auto opt = [&](const char* flag, std::optional<double>& slot, const char* what) {
        sub->add_option_function<double>(flag, [&slot](const double& v) { slot = v; }, what);
      };
      opt("--n", o.n, "Structure exponent n");
      opt("--sigma", o.sigma, "Kernel order");
      opt("--m", o.m, "Growth exponent");
      opt("--b0", o.b0, "Superlinearity constant");
      opt("--C0", o.C0, "Superlinearity offset");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_validation;
  }
  return dispatch(o, out, err);
}

}  // namespace nlh
