#include "sqgw/solver.hpp"

#include <cmath>
#include <limits>

#include "sqgw/symmetry.hpp"

namespace sqgw {

void SolveOptions::validate() const {
  if (max_iters <= 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be positive");
  if (!(step0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "step0 must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0))
    throw Error(ErrorCode::InvalidArgument, "backtrack must lie in (0, 1)");
  if (!(grad_tol > 0.0) || !(residual_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (steiner_every < 1) throw Error(ErrorCode::InvalidArgument, "steiner_every must be >= 1");
  if (max_backtracks < 1) throw Error(ErrorCode::InvalidArgument, "max_backtracks must be >= 1");
}

ScalarField initialize(SpectralWorkspace& ws, const Profile& p, const WaveParams& w, double r0,
                       double amplitude, double sigma) {
  w.validate();
  const auto& g = ws.grid();
  if (!(r0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "seed centre r0 must be positive");
  if (!(sigma > 2.0 * std::max(g.hr(), g.hz())))
    throw Error(ErrorCode::InvalidArgument, "seed width must exceed two cells");
  if (!(amplitude > w.c * r0 + w.k))
    throw Error(ErrorCode::NoNehariPoint,
                "seed amplitude does not exceed the cutoff c r0 + k at the seed centre");
  const double s2 = sigma * sigma;
  auto seed = ScalarField::from_function(g, [&](double r, double z) {
    return amplitude * (std::exp(-((r - r0) * (r - r0) + z * z) / s2) -
                        std::exp(-((r + r0) * (r + r0) + z * z) / s2));
  });
  const auto projected = steiner_z(dagger(seed));
  const auto scale = nehari_scale(ws, projected, p, w);
  return scale.t * projected;
}

ScalarField initialize(SpectralWorkspace& ws, const Profile& p, const WaveParams& w,
                       const SeedParams& seed) {
  return initialize(ws, p, w, seed.r0, seed.amplitude_factor * (w.c * seed.r0 + w.k), seed.sigma);
}

namespace {

struct Iterate {
  ScalarField psi;
  double E = 0.0;
  double norm2 = 0.0;
  double t = 1.0;
};

Iterate project(SpectralWorkspace& ws, const ScalarField& raw, const Profile& p,
                const WaveParams& w, bool with_steiner) {
  auto d = dagger(raw);
  if (with_steiner) d = steiner_z(d);
  const FiberMap fiber(ws, d, p, w);
  const auto scale = nehari_scale(fiber);
  Iterate it;
  it.t = scale.t;
  it.psi = scale.t * d;
  it.norm2 = scale.t * scale.t * fiber.norm2();
  const double V =
      integrate_half(it.psi, [&](double v, double r, double) { return p.eval(v - w.c * r - w.k).F; });
  it.E = 0.5 * it.norm2 - 2.0 * V;
  return it;
}

struct GradientInfo {
  ScalarField theta;
  ScalarField G;
  double rel_grad = 0.0;
  double residual = 0.0;
};

GradientInfo gradient_info(SpectralWorkspace& ws, const Iterate& it, const Profile& p,
                           const WaveParams& w) {
  GradientInfo out;
  out.theta = theta_from_psi(it.psi, p, w);
  out.G = it.psi - ws.riesz_inverse(out.theta);
  const double gnorm2 = std::max(ws.x_inner(out.G, out.G), 0.0);
  out.rel_grad = std::sqrt(gnorm2 / it.norm2);
  const double tnorm = l2_norm(out.theta);
  out.residual = tnorm > 0.0 ? l2_norm(ws.half_laplacian(it.psi) - out.theta) / tnorm
                             : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

SolveReport minimize(SpectralWorkspace& ws, const ScalarField& psi0, const Profile& p,
                     const WaveParams& w, const SolveOptions& opts) {
  opts.validate();
  w.validate();
  SolveReport rep;
  rep.c = w.c;
  rep.k = w.k;

  Iterate cur = project(ws, psi0, p, w, true);
  auto info = gradient_info(ws, cur, p, w);
  rep.energy_history.push_back(cur.E);
  rep.residual_history.push_back(info.residual);
  rep.grad_history.push_back(info.rel_grad);
  rep.t_scale_history.push_back(cur.t);

  double tau = opts.step0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (info.rel_grad < opts.grad_tol && info.residual < opts.residual_tol) {
      rep.converged = true;
      break;
    }
    const bool with_steiner = (it + 1) % opts.steiner_every == 0;
    const double gnorm2 = info.rel_grad * info.rel_grad * cur.norm2;
    int backtracks = 0;
    Iterate trial;
    while (true) {
      trial = project(ws, cur.psi - tau * info.G, p, w, with_steiner);
      const double required = cur.E - opts.armijo * tau * gnorm2;
      // Below roundoff the Armijo decrease cannot be resolved; accept any
      // step that does not raise E beyond it.
      const double floor = 1e-13 * std::abs(cur.E);
      if (trial.E <= required || (opts.armijo * tau * gnorm2 < floor && trial.E <= cur.E + floor))
        break;
      tau *= opts.backtrack;
      if (++backtracks >= opts.max_backtracks)
        throw Error(ErrorCode::Stall, "line search failed after " +
                                          std::to_string(backtracks) + " step reductions");
    }
    cur = std::move(trial);
    info = gradient_info(ws, cur, p, w);
    rep.energy_history.push_back(cur.E);
    rep.residual_history.push_back(info.residual);
    rep.grad_history.push_back(info.rel_grad);
    rep.t_scale_history.push_back(cur.t);
    if (backtracks == 0) tau = std::min(opts.step0, tau / opts.backtrack);
  }
  rep.iterations = it;

  // Final enforced Steiner pass.
  {
    const auto sharp = steiner_z(cur.psi);
    bool fixed = true;
    for (std::size_t n = 0; n < sharp.size() && fixed; ++n) fixed = sharp[n] == cur.psi[n];
    if (!fixed) {
      cur = project(ws, sharp, p, w, false);
      info = gradient_info(ws, cur, p, w);
      rep.energy_history.push_back(cur.E);
      rep.residual_history.push_back(info.residual);
      rep.grad_history.push_back(info.rel_grad);
      rep.t_scale_history.push_back(cur.t);
      rep.converged = rep.converged && info.rel_grad < opts.grad_tol && info.residual < opts.residual_tol;
    }
  }

  rep.psi = std::move(cur.psi);
  rep.theta = std::move(info.theta);
  if (opts.run_verify) {
    try {
      rep.diagnostics = verify_solution(ws, rep.psi, p, w);
    } catch (const Error& e) {
      rep.error = e.what();
    }
  }
  return rep;
}

std::vector<SolveReport> sweep(SpectralWorkspace& ws, const Profile& p,
                               const std::vector<double>& c_list, const std::vector<double>& k_list,
                               const SolveOptions& opts, const SeedParams& seed, bool warm_start) {
  for (double c : c_list)
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidWaveParams, "sweep speeds must be positive");
  for (double k : k_list)
    if (!(k > 0.0)) throw Error(ErrorCode::InvalidWaveParams, "sweep cutoffs must be positive");

  std::vector<SolveReport> out;
  std::vector<std::size_t> converged;
  for (double c : c_list)
    for (double k : k_list) {
      const WaveParams w{c, k};
      SolveReport rep;
      bool warm = false;
      try {
        ScalarField start;
        if (warm_start && !converged.empty()) {
          std::size_t best = converged.front();
          double best_d = INFINITY;
          for (std::size_t idx : converged) {
            const double d = std::hypot(out[idx].c - c, out[idx].k - k);
            if (d < best_d) {
              best_d = d;
              best = idx;
            }
          }
          try {
            const auto& prev = out[best].psi;
            start = nehari_scale(ws, prev, p, w).t * prev;
            warm = true;
          } catch (const Error&) {
            warm = false;
          }
        }
        if (!warm) start = initialize(ws, p, w, seed);
        rep = minimize(ws, start, p, w, opts);
      } catch (const Error& e) {
        rep.error = e.what();
      }
      rep.c = c;
      rep.k = k;
      rep.warm_started = warm;
      out.push_back(std::move(rep));
      if (out.back().converged) converged.push_back(out.size() - 1);
    }
  return out;
}

}  // namespace sqgw
