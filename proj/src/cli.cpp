#include "sqgw/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "sqgw/evolve.hpp"
#include "sqgw/io.hpp"
#include "sqgw/solver.hpp"
#include "sqgw/verify.hpp"

namespace sqgw {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Usage:
    case ErrorCode::Io:
    case ErrorCode::BadMagic:
    case ErrorCode::DimensionOverflow:
    case ErrorCode::TruncatedPayload:
    case ErrorCode::GridMismatch:
    case ErrorCode::OddResolution:
    case ErrorCode::ResolutionTooSmall:
    case ErrorCode::NonPositiveExtent:
    case ErrorCode::InvalidProfile:
    case ErrorCode::InvalidWaveParams:
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    default:
      return kExitValidation;
  }
}

namespace {

json config_json(const Config& c) {
  json j;
  j["grid"] = {{"nr", c.grid.nr}, {"nz", c.grid.nz}, {"Lr", c.grid.Lr}, {"Lz", c.grid.Lz}};
  j["wave"] = {{"c", c.wave.c}, {"k", c.wave.k}};
  j["profile"] = {{"kind", to_string(c.profile.kind)}, {"a", c.profile.a}, {"b", c.profile.b}, {"amp", c.profile.amp}};
  j["solver"] = {{"max_iters", c.solver.max_iters},     {"step0", c.solver.step0},
                 {"backtrack", c.solver.backtrack},     {"grad_tol", c.solver.grad_tol},
                 {"residual_tol", c.solver.residual_tol}, {"steiner_every", c.solver.steiner_every},
                 {"armijo", c.solver.armijo},           {"max_backtracks", c.solver.max_backtracks},
                 {"verify", c.solver.run_verify}};
  j["init"] = {{"r0", c.init.r0}, {"amplitude_factor", c.init.amplitude_factor}, {"sigma", c.init.sigma}};
  j["evolve"] = {{"T", c.evolve.T},
                 {"cfl", c.evolve.cfl},
                 {"dealias", c.evolve.dealias},
                 {"snapshot_every", c.evolve.snapshot_every},
                 {"speed_tol", c.evolve_speed_tol},
                 {"shape_tol", c.evolve_shape_tol}};
  j["output"] = {{"dir", c.output_dir}};
  j["seed"] = c.seed;
  return j;
}

json verify_json(const VerifyReport& v) {
  json j;
  j["passed"] = v.passed();
  j["residual"] = v.residual_rel;
  j["representation"] = std::isfinite(v.representation_rel) ? json(v.representation_rel) : json(nullptr);
  j["decay_slope"] = v.decay_available ? json(v.decay_slope) : json(nullptr);
  j["energy"] = v.energy;
  j["theta_l2"] = v.theta_l2;
  j["odd_r_residual"] = v.odd_r_residual;
  j["even_z_residual"] = v.even_z_residual;
  j["even_z_bound"] = v.even_z_bound;
  j["monotone_violations"] = v.monotone_violations;
  j["sign_violations"] = v.sign_violations;
  j["support"] = {{"area", v.support.area},
                  {"axis_gap", v.support.axis_gap},
                  {"components", v.support.components},
                  {"radius", v.support.radius},
                  {"bbox", {v.support.r_min, v.support.r_max, v.support.z_min, v.support.z_max}}};
  json ineq = json::array();
  for (const auto& c : v.inequalities.checks)
    ineq.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"note", c.note}});
  j["inequalities"] = ineq;
  json flags = json::object();
  for (const auto& f : v.flags) flags[f.name] = f.passed;
  j["flags"] = flags;
  j["warnings"] = v.warnings;
  return j;
}

std::string sci(double v) {
  std::ostringstream o;
  o << std::setprecision(4) << std::scientific << v;
  return o.str();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

enum class Format { Binary, Csv };

fs::path save_field(const ScalarField& f, const fs::path& stem, Format fmt, std::optional<double> time = {}) {
  if (fmt == Format::Csv) {
    auto path = stem;
    path += ".csv";
    export_field_csv(f, path);
    return path;
  }
  auto path = stem;
  path += ".sqgf";
  export_field(f, path, time);
  return path;
}

ScalarField load_field_on(const fs::path& path, const GridSpec& expected) {
  auto data = import_field(path);
  if (!(data.field.grid() == expected))
    throw Error(ErrorCode::GridMismatch, "field grid " + std::to_string(data.field.grid().nr) + "x" +
                                             std::to_string(data.field.grid().nz) + " does not match the config grid");
  return std::move(data.field);
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> warnings;
  WarningSink sink() {
    return [this](std::string_view msg) {
      warnings.emplace_back(msg);
      err << "warning: " << msg << "\n";
    };
  }
};

int cmd_solve(Context& ctx, const Config& cfg, Format fmt) {
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  auto ws = make_grid(cfg.grid);
  ws.set_warning_sink(ctx.sink());
  const auto profile = cfg.profile.build();
  const auto psi0 = initialize(ws, profile, cfg.wave, cfg.init);
  const auto rep = minimize(ws, psi0, profile, cfg.wave, cfg.solver);

  json j;
  j["command"] = "solve";
  j["config"] = config_json(cfg);
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["energy"] = rep.energy_history.back();
  j["residual"] = rep.residual_history.back();
  j["grad"] = rep.grad_history.back();
  j["t_scale"] = rep.t_scale_history.back();
  j["history"] = {{"energy", rep.energy_history},
                  {"residual", rep.residual_history},
                  {"grad", rep.grad_history},
                  {"t_scale", rep.t_scale_history}};
  j["verify"] = rep.diagnostics ? verify_json(*rep.diagnostics) : json(nullptr);
  if (!rep.error.empty()) j["verify_error"] = rep.error;
  j["files"] = {{"psi", save_field(rep.psi, dir / "psi", fmt).filename().string()},
                {"theta", save_field(rep.theta, dir / "theta", fmt).filename().string()},
                {"heatmap", "theta.pgm"}};
  render_heatmap(rep.theta, dir / "theta.pgm");
  j["warnings"] = ctx.warnings;
  write_json(dir / "solve_report.json", j);

  const bool verified = !rep.diagnostics || rep.diagnostics->passed();
  ctx.out << "solve: " << (rep.converged ? "converged" : "not converged") << " after " << rep.iterations
          << " iterations\n"
          << "  E = " << std::setprecision(12) << rep.energy_history.back() << "\n"
          << "  residual = " << sci(rep.residual_history.back()) << ", grad = " << sci(rep.grad_history.back())
          << "\n";
  if (rep.diagnostics) {
    for (const auto& f : rep.diagnostics->flags)
      ctx.out << "  check " << f.name << ": " << (f.passed ? "pass" : "FAIL") << "\n";
  }
  ctx.out << "  report: " << (dir / "solve_report.json").string() << "\n";
  return rep.converged && verified && rep.error.empty() ? kExitOk : kExitValidation;
}

int cmd_verify(Context& ctx, const Config& cfg, const fs::path& field) {
  const fs::path dir = cfg.output_dir;
  const auto psi = load_field_on(field, cfg.grid);
  auto ws = make_grid(cfg.grid);
  ws.set_warning_sink(ctx.sink());
  const auto profile = cfg.profile.build();
  const auto rep = verify_solution(ws, psi, profile, cfg.wave);
  ensure_dir(dir);
  json j;
  j["command"] = "verify";
  j["config"] = config_json(cfg);
  j["field"] = field.string();
  j["verify"] = verify_json(rep);
  j["warnings"] = ctx.warnings;
  write_json(dir / "verify_report.json", j);

  ctx.out << "verify: residual = " << sci(rep.residual_rel) << ", representation = " << sci(rep.representation_rel)
          << "\n";
  for (const auto& f : rep.flags) ctx.out << "  check " << f.name << ": " << (f.passed ? "pass" : "FAIL") << "\n";
  for (const auto& c : rep.inequalities.checks)
    ctx.out << "  inequality " << c.name << ": " << to_string(c.status) << "\n";
  ctx.out << "  report: " << (dir / "verify_report.json").string() << "\n";
  return rep.passed() ? kExitOk : kExitValidation;
}

int cmd_evolve(Context& ctx, const Config& cfg, const fs::path& field, Format fmt) {
  const fs::path dir = cfg.output_dir;
  const auto theta0 = load_field_on(field, cfg.grid);
  auto ws = make_grid(cfg.grid);
  ws.set_warning_sink(ctx.sink());
  const auto result = run_evolution(ws, theta0, cfg.evolve);
  const auto ref = cfg.evolve.dealias ? ws.dealias(theta0) : theta0;
  const auto diag = travel_diagnostics(ws, result.snapshots, ref, cfg.wave.c);

  ensure_dir(dir / "snapshots");
  json files = json::array();
  for (std::size_t n = 0; n < result.snapshots.size(); ++n) {
    std::ostringstream name;
    name << "theta_" << std::setw(4) << std::setfill('0') << n;
    const auto& s = result.snapshots[n];
    files.push_back(fs::relative(save_field(s.theta, dir / "snapshots" / name.str(), fmt, s.time), dir).string());
  }
  render_heatmap(result.theta_T, dir / "theta_T.pgm");

  const double speed_err = std::abs(diag.fitted_speed - cfg.wave.c) / cfg.wave.c;
  const bool ok = speed_err <= cfg.evolve_speed_tol && diag.max_shape_error() <= cfg.evolve_shape_tol;
  json j;
  j["command"] = "evolve";
  j["config"] = config_json(cfg);
  j["field"] = field.string();
  j["passed"] = ok;
  j["steps"] = result.steps;
  j["fitted_speed"] = diag.fitted_speed;
  j["speed_rel_error"] = speed_err;
  j["max_shape_error"] = diag.max_shape_error();
  j["l2_drift"] = result.l2_drift;
  j["l4_drift"] = result.l4_drift;
  j["odd_r_drift"] = result.odd_r_drift;
  j["times"] = diag.times;
  j["shift"] = diag.shift;
  j["shape_error"] = diag.shape_error;
  j["snapshots"] = files;
  j["warnings"] = ctx.warnings;
  write_json(dir / "evolve_report.json", j);

  ctx.out << "evolve: " << result.steps << " steps to T = " << cfg.evolve.T << "\n"
          << "  fitted speed = " << std::setprecision(8) << diag.fitted_speed << " (c = " << cfg.wave.c
          << ", rel. error " << sci(speed_err) << ")\n"
          << "  max shape error = " << sci(diag.max_shape_error()) << "\n"
          << "  L2 drift = " << sci(result.l2_drift) << "\n"
          << "  report: " << (dir / "evolve_report.json").string() << "\n";
  return ok ? kExitOk : kExitValidation;
}

int cmd_sweep(Context& ctx, const Config& cfg, const std::vector<double>& cs, const std::vector<double>& ks) {
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir / "sweep");
  auto ws = make_grid(cfg.grid);
  ws.set_warning_sink(ctx.sink());
  const auto profile = cfg.profile.build();
  const auto reps = sweep(ws, profile, cs, ks, cfg.solver, cfg.init, true);

  json cases = json::array();
  bool all = true;
  for (std::size_t n = 0; n < reps.size(); ++n) {
    const auto& r = reps[n];
    json cj;
    cj["c"] = r.c;
    cj["k"] = r.k;
    cj["converged"] = r.converged;
    cj["warm_started"] = r.warm_started;
    cj["iterations"] = r.iterations;
    cj["error"] = r.error.empty() ? json(nullptr) : json(r.error);
    const bool solved = r.error.empty() && !r.energy_history.empty();
    cj["energy"] = solved ? json(r.energy_history.back()) : json(nullptr);
    cj["residual"] = solved ? json(r.residual_history.back()) : json(nullptr);
    cj["verify"] = r.diagnostics ? verify_json(*r.diagnostics) : json(nullptr);
    if (solved) {
      const auto path = dir / "sweep" / ("psi_" + std::to_string(n));
      cj["psi"] = fs::relative(save_field(r.psi, path, Format::Binary), dir).string();
    }
    cases.push_back(cj);
    all = all && r.converged && r.error.empty();
    ctx.out << "sweep: c = " << r.c << ", k = " << r.k << ": "
            << (!r.error.empty() ? "error: " + r.error : r.converged ? "converged" : "not converged");
    if (solved) ctx.out << ", E = " << std::setprecision(10) << r.energy_history.back();
    ctx.out << "\n";
  }
  json j;
  j["command"] = "sweep";
  j["config"] = config_json(cfg);
  j["c_list"] = cs;
  j["k_list"] = ks;
  j["cases"] = cases;
  j["warnings"] = ctx.warnings;
  write_json(dir / "sweep_report.json", j);
  ctx.out << "  report: " << (dir / "sweep_report.json").string() << "\n";
  return all ? kExitOk : kExitValidation;
}

int cmd_validate_profile(Context& ctx, const Config& cfg) {
  const fs::path dir = cfg.output_dir;
  const auto profile = cfg.profile.build();
  const auto rep = validate_hypotheses(profile);
  ensure_dir(dir);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"worst", c.worst}, {"detail", c.detail}});
    ctx.out << "  " << c.name << ": " << (c.passed ? "pass" : "FAIL");
    if (!c.detail.empty()) ctx.out << " (" << c.detail << ")";
    ctx.out << "\n";
  }
  ctx.out << "validate-profile: fitted growth exponent " << std::setprecision(6) << rep.fitted_nu << ", "
          << (rep.all_passed() ? "all checks pass" : "checks FAILED") << "\n";
  json j;
  j["command"] = "validate-profile";
  j["config"] = config_json(cfg);
  j["passed"] = rep.all_passed();
  j["fitted_nu"] = rep.fitted_nu;
  j["checks"] = checks;
  write_json(dir / "profile_report.json", j);
  return rep.all_passed() ? kExitOk : kExitValidation;
}

Format parse_format(const std::string& s) { return s == "csv" ? Format::Csv : Format::Binary; }

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Travelling-wave solver for the surface quasi-geostrophic equation", "sqgw"};
  app.require_subcommand(1);

  std::string config_path, field_path, out_dir, format = "bin";
  std::optional<double> T, cfl;
  std::vector<double> c_list, k_list;

  auto* solve = app.add_subcommand("solve", "Minimise the energy on the Nehari set and write the wave");
  solve->add_option("--config", config_path, "Config file")->required();
  solve->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  solve->add_option("--format", format, "Field format")->check(CLI::IsMember({"bin", "csv"}));

  auto* verify = app.add_subcommand("verify", "Check a stream function against the wave equation");
  verify->add_option("--field", field_path, "Stream function field file")->required();
  verify->add_option("--config", config_path, "Config file")->required();
  verify->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  auto* evolve = app.add_subcommand("evolve", "Advect a profile under SQG and measure its travel");
  evolve->add_option("--field", field_path, "Theta field file")->required();
  evolve->add_option("--config", config_path, "Config file")->required();
  evolve->add_option("--T", T, "Final time (default evolve.T)");
  evolve->add_option("--cfl", cfl, "CFL number (default evolve.cfl)");
  evolve->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  evolve->add_option("--format", format, "Snapshot format")->check(CLI::IsMember({"bin", "csv"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a grid of (c, k)");
  sweep_cmd->add_option("--config", config_path, "Config file")->required();
  sweep_cmd->add_option("--c-list", c_list, "Speeds")->required()->delimiter(',');
  sweep_cmd->add_option("--k-list", k_list, "Cutoffs")->required()->delimiter(',');
  sweep_cmd->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  auto* validate = app.add_subcommand("validate-profile", "Check the nonlinearity against the hypotheses");
  validate->add_option("--config", config_path, "Config file")->required();
  validate->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front())
      err << sub->help();
    return kExitUsage;
  }

  Context ctx{out, err, {}};
  try {
    auto cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const Format fmt = parse_format(format);
    if (*solve) return cmd_solve(ctx, cfg, fmt);
    if (*verify) return cmd_verify(ctx, cfg, field_path);
    if (*evolve) {
      if (T) cfg.evolve.T = *T;
      if (cfl) cfg.evolve.cfl = *cfl;
      try {
        cfg.evolve.validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::Usage, e.what());
      }
      return cmd_evolve(ctx, cfg, field_path, fmt);
    }
    if (*sweep_cmd) return cmd_sweep(ctx, cfg, c_list, k_list);
    if (*validate) return cmd_validate_profile(ctx, cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace sqgw
