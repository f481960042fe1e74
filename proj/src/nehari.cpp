#include "sqgw/nehari.hpp"

#include <cmath>

#include "sqgw/symmetry.hpp"

namespace sqgw {

namespace {

void require_odd(const ScalarField& psi, const char* who) {
  if (odd_r_residual(psi) > 1e-10 * psi.max_abs())
    throw Error(ErrorCode::SymmetryViolation, std::string(who) + ": psi is not odd in r");
}

}  // namespace

EnergyParts energy(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                   const WaveParams& w) {
  require_odd(psi, "energy");
  EnergyParts out;
  out.norm2 = ws.x_inner(psi, psi);
  out.V = integrate_half(psi, [&](double v, double r, double) { return p.eval(v - w.c * r - w.k).F; });
  out.E = 0.5 * out.norm2 - 2.0 * out.V;
  return out;
}

ScalarField euler_gradient(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                           const WaveParams& w) {
  require_odd(psi, "euler_gradient");
  return psi - ws.riesz_inverse(theta_from_psi(psi, p, w));
}

double nehari_functional(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                         const WaveParams& w) {
  require_odd(psi, "nehari_functional");
  const double norm2 = ws.x_inner(psi, psi);
  const double work =
      integrate_half(psi, [&](double v, double r, double) { return p.f(v - w.c * r - w.k) * v; });
  return norm2 - 2.0 * work;
}

FiberMap::FiberMap(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                   const WaveParams& w)
    : profile_(&p) {
  require_odd(psi, "fibre map");
  norm2_ = ws.x_inner(psi, psi);
  const auto& g = psi.grid();
  cell_area_ = g.cell_area();
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    const double level = w.c * g.r(i) + w.k;
    for (std::size_t j = 0; j < g.nz; ++j)
      if (psi(i, j) > 0.0) nodes_.push_back({psi(i, j), level});
  }
}

FiberMap::Value FiberMap::operator()(double t) const {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "fibre map needs t > 0");
  double work = 0.0;   // int f(t psi - level) psi
  double slope = 0.0;  // int (f - t psi f') psi
  for (const auto& n : nodes_) {
    const auto v = profile_->eval(t * n.psi - n.level);
    if (v.f == 0.0 && v.df == 0.0) continue;
    work += v.f * n.psi;
    slope += (v.f - t * n.psi * v.df) * n.psi;
  }
  work *= cell_area_;
  slope *= cell_area_;
  return {0.5 * norm2_ - work / t, slope / (t * t)};
}

NehariScale nehari_scale(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                         const WaveParams& w) {
  return nehari_scale(FiberMap(ws, psi, p, w));
}

NehariScale nehari_scale(const FiberMap& fiber) {
  if (fiber.dagger_vanishes())
    throw Error(ErrorCode::NoNehariPoint, "Psi^dagger vanishes on the half plane");
  const double tol = kNehariRootTol * fiber.norm2();

  NehariScale out;
  double lo = 0.0, hi = 0.0;
  auto val = fiber(1.0);
  if (std::abs(val.g) < tol) return {1.0, val.g, 0};
  if (val.g > 0.0) {
    lo = 1.0;
    hi = 2.0;
    while (fiber(hi).g > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > kNehariTMax)
        throw Error(ErrorCode::NoNehariPoint,
                    "cutoff level not reached for t up to 1e9 (support too small)");
    }
  } else {
    hi = 1.0;
    lo = 0.5;
    while (fiber(lo).g <= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw Error(ErrorCode::NoNehariPoint, "fibre map never positive");
    }
  }

  // Newton from the upper end, bisection whenever a step leaves the bracket.
  double t = hi;
  for (out.iterations = 1; out.iterations <= 200; ++out.iterations) {
    val = fiber(t);
    if (std::abs(val.g) < tol) break;
    if (val.g > 0.0)
      lo = t;
    else
      hi = t;
    double next = val.dg < 0.0 ? t - val.g / val.dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4e-16 * hi) {
      t = next;
      val = fiber(t);
      break;
    }
    t = next;
  }
  out.t = t;
  out.g = val.g;
  return out;
}

NehariPoint evaluate_point(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                           const WaveParams& w) {
  NehariPoint out;
  out.psi = psi;
  const auto e = energy(ws, psi, p, w);
  out.energy = e.E;
  out.norm2 = e.norm2;
  const double work =
      integrate_half(psi, [&](double v, double r, double) { return p.f(v - w.c * r - w.k) * v; });
  out.nehari_residual = e.norm2 - 2.0 * work;
  return out;
}

NehariPoint project_to_nehari(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                              const WaveParams& w) {
  const auto scale = nehari_scale(ws, psi, p, w);
  auto out = evaluate_point(ws, scale.t * psi, p, w);
  out.t_scale = scale.t;
  return out;
}

}  // namespace sqgw
