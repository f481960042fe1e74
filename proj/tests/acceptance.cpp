// Acceptance run on the reference configuration: 256x256 grid, box 40x40,
// default bump profile, c = 1, k = 0.1. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <fmt/format.h>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sqgw/evolve.hpp"
#include "sqgw/nehari.hpp"
#include "sqgw/solver.hpp"
#include "sqgw/symmetry.hpp"
#include "sqgw/verify.hpp"

using namespace sqgw;

namespace {

const GridSpec kRef{256, 256, 20, 20};
const WaveParams kWave{1.0, 0.1};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
  int id;
  bool pass;
  std::string detail;
};
std::vector<Line> lines;

void report(int id, bool pass, const std::string& detail) {
  lines.push_back({id, pass, detail});
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

ScalarField mode(const GridSpec& g, int m, int n, bool use_sin) {
  const double kr = std::numbers::pi * m / g.Lr, kz = std::numbers::pi * n / g.Lz;
  return ScalarField::from_function(g, [&](double r, double z) {
    return use_sin ? std::sin(kr * r + kz * z) : std::cos(kr * r + kz * z);
  });
}

ScalarField odd_blob(const GridSpec& g, double r0, double z0, double s) {
  return ScalarField::from_function(g, [&](double r, double z) {
    return std::exp(-((r - r0) * (r - r0) + (z - z0) * (z - z0)) / (s * s)) -
           std::exp(-((r + r0) * (r + r0) + (z - z0) * (z - z0)) / (s * s));
  });
}

// Exactly odd random field with a positive lobe on r > 0.
ScalarField random_odd(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.1 * g.Lr, 0.4 * g.Lr);
  const double r0 = pos(rng), z0 = 0.5 * pos(rng) - 0.1 * g.Lr;
  return symmetry_project(oracle::random_field(g, rng, true, 5) + odd_blob(g, r0, z0, 0.15 * g.Lr),
                          MirrorSymmetry::OddR);
}

struct Run {
  SolveReport solve;
  double solve_seconds = 0.0;
  double residual = 0.0;
  TrajectoryDiagnostics travel;
  EvolveResult evolution;
  double evolve_seconds = 0.0;
};

Run solve_and_evolve(const GridSpec& g) {
  auto ws = make_grid(g);
  const auto p = Profile::default_bump();
  Run run;
  SolveOptions o;
  o.run_verify = false;
  auto t0 = Clock::now();
  run.solve = minimize(ws, initialize(ws, p, kWave), p, kWave, o);
  run.solve_seconds = seconds_since(t0);
  run.residual = pde_residual(ws, run.solve.psi, p, kWave);

  EvolveOptions eo;
  eo.T = 2.0 / kWave.c;
  t0 = Clock::now();
  run.evolution = run_evolution(ws, run.solve.theta, eo);
  run.evolve_seconds = seconds_since(t0);
  run.travel = travel_diagnostics(ws, run.evolution.snapshots, ws.dealias(run.solve.theta), kWave.c);
  std::printf("  [%zux%zu] iterations %d  E %.9g  residual %.3e  solve %.1fs  speed %.6f  shape %.3e  evolve %.1fs\n",
              g.nr, g.nz, run.solve.iterations, run.solve.energy_history.back(), run.residual,
              run.solve_seconds, run.travel.fitted_speed, run.travel.max_shape_error(), run.evolve_seconds);
  std::fflush(stdout);
  return run;
}

void criterion1() {
  const auto t0 = Clock::now();
  const GridSpec g{64, 48, 10, 6};
  auto ws = make_grid(g);
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> mr(-31, 31), mz(-23, 23);
  double mode_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = mr(rng), n = mz(rng);
    const double xi = std::hypot(std::numbers::pi * m / g.Lr, std::numbers::pi * n / g.Lz);
    const auto f = mode(g, m, n, trial % 2 == 0);
    mode_err = std::max(mode_err, (ws.half_laplacian(f) - xi * f).max_abs() / std::max(1.0, xi));
  }

  auto wr = make_grid(kRef);
  double ident_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = oracle::random_field(kRef, rng, true);
    ident_err = std::max(ident_err, (wr.half_laplacian(wr.riesz_inverse(f)) - f).max_abs() / f.max_abs());
  }

  const double s = 2.0;
  auto u = [s](double r, double z) { return std::exp(-(r * r + z * z) / (s * s)); };
  const auto out = wr.half_laplacian(ScalarField::from_function(kRef, u));
  double gauss_err = 0.0;
  for (std::size_t i : {128u, 131u, 140u, 150u, 170u})
    for (std::size_t j : {128u, 135u}) {
      const double ref = oracle::half_laplacian_singular(u, kRef.r(i), kRef.z(j), 14.0 * s);
      gauss_err = std::max(gauss_err, std::abs(out(i, j) - ref) / out.max_abs());
    }
  const double secs = seconds_since(t0);
  report(1, mode_err <= 1e-12 && ident_err <= 1e-12 && gauss_err < 1e-3 && secs < 10.0,
         fmt::format("modes {:.2e} identity {:.2e} gaussian {:.2e} time {:.1f}s", mode_err, ident_err, gauss_err, secs));
}

void criterion2() {
  const auto t0 = Clock::now();
  auto ws = make_grid(kRef);
  std::mt19937_64 rng(102);

  // Quadratic profile with no cutoff: g(t) = N/2 - t int_H Psi_+^3.
  double closed_err = 0.0, stated_ratio = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = random_odd(kRef, rng);
    const double N = ws.x_inner(psi, psi);
    const double cube = integrate_half(psi, [](double v, double, double) { return v > 0 ? v * v * v : 0.0; });
    const double t = nehari_scale(ws, psi, Profile::quadratic(), WaveParams{0.0, 0.0}).t;
    closed_err = std::max(closed_err, std::abs(t / (N / (2.0 * cube)) - 1.0));
    stated_ratio = t / (N / (4.0 * cube));
  }

  const auto p = Profile::default_bump();
  double small_t_err = 0.0, max_dg = -std::numeric_limits<double>::infinity();
  int grid_misses = 0;
  const int n = 50;
  const double ratio = std::pow(100.0, 1.0 / (n - 1));
  for (int trial = 0; trial < 100; ++trial) {
    const auto psi = random_odd(kRef, rng);
    const FiberMap fiber(ws, psi, p, kWave);
    const double half = 0.5 * fiber.norm2();
    small_t_err = std::max(small_t_err, std::abs(fiber(1e-8).g - half) / half);
    const double ts = nehari_scale(fiber).t;
    max_dg = std::max(max_dg, fiber(ts).dg);
    int best = 0;
    double best_e = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < n; ++q) {
      const double e = energy(ws, (ts * 0.1 * std::pow(ratio, q)) * psi, p, kWave).E;
      if (e > best_e) best_e = e, best = q;
    }
    const double t_best = ts * 0.1 * std::pow(ratio, best);
    if (std::abs(std::log(t_best / ts)) > std::log(ratio) ||
        best_e > energy(ws, ts * psi, p, kWave).E + 1e-12 * std::abs(best_e))
      ++grid_misses;
  }
  const double secs = seconds_since(t0);
  report(2, closed_err <= 1e-10 && small_t_err <= 1e-10 && max_dg < 0.0 && grid_misses == 0 && secs < 60.0,
         fmt::format("closed form {:.2e} (t / [N/(4 cube)] = {:.3f}) g(0+) {:.2e} max g' {:.3e} t-grid misses {} time {:.1f}s",
                     closed_err, stated_ratio, small_t_err, max_dg, grid_misses, secs));
}

void criterion3() {
  auto ws = make_grid(kRef);
  const auto p = Profile::default_bump();
  std::mt19937_64 rng(103);
  const auto psi = project_to_nehari(ws, random_odd(kRef, rng), p, kWave).psi;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto h = 10.0 * random_odd(kRef, rng);
    const double exact = ws.x_inner(euler_gradient(ws, psi, p, kWave), h);
    auto fd = [&](double eps) {
      return (energy(ws, psi + eps * h, p, kWave).E - energy(ws, psi - eps * h, p, kWave).E) / (2 * eps);
    };
    const double r = std::abs(fd(1e-3) - exact) / std::abs(fd(1e-4) - exact);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  report(3, lo >= 80.0 && hi <= 120.0, fmt::format("error ratio range [{:.1f}, {:.1f}]", lo, hi));
}

void criterion4(const Run& run) {
  const auto& s = run.solve;
  const double E = s.energy_history.back(), tl2 = l2_norm(s.theta);
  report(4, run.residual < 1e-4 && E > 0.0 && tl2 > 0.0 && run.solve_seconds < 300.0,
         fmt::format("residual {:.3e} E {:.6g} |Theta|_2 {:.4g} iterations {} converged {} time {:.1f}s",
                     run.residual, E, tl2, s.iterations, s.converged, run.solve_seconds));
}

void criterion5(const Run& run) {
  auto ws = make_grid(kRef);
  std::mt19937_64 rng(105);
  int fails = 0, checked = 0;
  std::string first;
  auto tally = [&](const InequalityReport& rep) {
    ++checked;
    if (!rep.nehari_member) {
      ++fails;
      if (first.empty()) first = "not a Nehari point";
    }
    for (const auto& c : rep.checks)
      if (c.status == CheckStatus::Fail) {
        ++fails;
        if (first.empty()) first = fmt::format("{} {:.6g} vs {:.6g}", c.name, c.lhs, c.rhs);
      }
  };
  const auto bump = Profile::default_bump();
  tally(inequality_suite(ws, run.solve.psi, bump, kWave));
  for (int trial = 0; trial < 100; ++trial)
    tally(inequality_suite(ws, project_to_nehari(ws, random_odd(kRef, rng), bump, kWave).psi, bump, kWave));

  // Quadratic identity, right-hand side assembled directly.
  const auto quad = Profile::quadratic();
  double ident_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pt = project_to_nehari(ws, random_odd(kRef, rng), quad, kWave);
    const double lower = integrate_half(pt.psi, [](double v, double r, double) {
      const double level = kWave.c * r + kWave.k, s = v - level;
      return s > 0 ? level * s * s : 0.0;
    });
    const double rhs = pt.norm2 / 6.0 + (2.0 / 3.0) * lower;
    ident_err = std::max(ident_err, std::abs(pt.energy - rhs) / std::abs(pt.energy));
  }
  report(5, fails == 0 && ident_err <= 1e-10,
         fmt::format("{} fields, {} failed checks{}; quadratic identity {:.2e}", checked, fails,
                     first.empty() ? "" : " (first: " + first + ")", ident_err));
}

void criterion6(const Run& coarse, const Run& fine) {
  auto ws = make_grid(kRef);
  const auto p = Profile::default_bump();
  const auto rep = verify_solution(ws, coarse.solve.psi, p, kWave);
  const double even_fine = even_z_residual(fine.solve.theta);
  const auto& s = rep.support;
  const bool box = s.r_max < 0.7 * kRef.Lr && s.z_min > -0.7 * kRef.Lz && s.z_max < 0.7 * kRef.Lz && !s.empty();
  const bool pass = rep.odd_r_residual == 0.0 && rep.even_z_residual <= rep.even_z_bound &&
                    even_fine <= 0.5 * rep.even_z_residual && rep.sign_violations == 0 &&
                    rep.monotone_violations == 0 && s.axis_gap >= kRef.hr() && box;
  report(6, pass,
         fmt::format("odd {:.1e} even {:.2e} (bound {:.2e}, 512: {:.2e}) sign {} monotone {} axis_gap {:.3f} "
                     "box r[{:.2f},{:.2f}] z[{:.2f},{:.2f}] components {}",
                     rep.odd_r_residual, rep.even_z_residual, rep.even_z_bound, even_fine, rep.sign_violations,
                     rep.monotone_violations, s.axis_gap, s.r_min, s.r_max, s.z_min, s.z_max, s.components));
}

void criterion7(const Run& run) {
  const auto fit = decay_fit(run.solve.psi, Profile::default_bump(), kWave);
  ScalarField cell(kRef);
  cell(kRef.half_start(), kRef.nz / 2) = 1.0;
  const double control = decay_fit(free_space_potential(cell), 2.0 * kRef.hr()).slope;
  report(7, fit.slope >= -1.35 && fit.slope <= -0.7 && std::abs(control + 1.0) <= 0.05,
         fmt::format("slope {:.4f} on [{:.2f}, {:.2f}] control {:.4f}", fit.slope, fit.r_in, fit.r_out, control));
}

void criterion8(const Run& run) {
  const double rep = representation_check(run.solve.psi, Profile::default_bump(), kWave);
  report(8, rep < 5e-2, fmt::format("representation {:.3e}", rep));
}

void criterion9(const Run& run) {
  const auto t0 = Clock::now();
  auto ws = make_grid(kRef);
  const auto radial = ScalarField::from_function(kRef, [](double r, double z) {
    const double q = (r * r + z * z) / (0.75 * 0.75);
    return (1.0 - q) * std::exp(-q);
  });
  EvolveOptions o;
  o.T = 1.0;
  o.snapshot_every = 0.5;
  const auto rad = run_evolution(ws, radial, o);
  const auto base = ws.dealias(radial);
  const double drift_radial = l2_norm(rad.theta_T - base) / l2_norm(base);
  const double radial_secs = seconds_since(t0);

  const double T = 2.0 / kWave.c;
  const double speed_err = std::abs(run.travel.fitted_speed - kWave.c) / kWave.c;
  const double shape = run.travel.max_shape_error();
  const double drift_rate = run.evolution.l2_drift / T;
  const double secs = run.evolve_seconds + radial_secs;
  report(9, speed_err <= 0.02 && shape < 5e-2 && drift_radial <= 1e-6 && drift_rate < 1e-5 && secs < 600.0,
         fmt::format("speed {:.6f} (error {:.2e}) shape {:.3e} radial {:.2e} L2 drift/T {:.2e} time {:.1f}s",
                     run.travel.fitted_speed, speed_err, shape, drift_radial, drift_rate, secs));
}

void criterion10(const std::vector<Run>& runs) {
  bool pass = true;
  std::string detail;
  for (std::size_t n = 0; n < runs.size(); ++n) {
    const auto& g = runs[n].solve.psi.grid();
    detail += fmt::format("{}{}: residual {:.3e} shape {:.3e}", n ? "; " : "", g.nr, runs[n].residual,
                          runs[n].travel.max_shape_error());
    if (n > 0)
      pass = pass && runs[n].residual < runs[n - 1].residual &&
             runs[n].travel.max_shape_error() < runs[n - 1].travel.max_shape_error();
  }
  report(10, pass, detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion1();
  criterion2();
  criterion3();

  std::vector<Run> runs;
  for (std::size_t n : {128u, 256u, 512u}) runs.push_back(solve_and_evolve({n, n, 20, 20}));
  const Run& ref = runs[1];

  criterion4(ref);
  criterion5(ref);
  criterion6(ref, runs[2]);
  criterion7(ref);
  criterion8(ref);
  criterion9(ref);
  criterion10(runs);

  int failed = 0;
  for (const auto& l : lines) failed += l.pass ? 0 : 1;
  std::printf("%d of %zu criteria passed, total %.0fs\n", static_cast<int>(lines.size()) - failed, lines.size(),
              seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
