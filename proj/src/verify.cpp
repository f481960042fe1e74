#include "sqgw/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqgw/nehari.hpp"
#include "sqgw/symmetry.hpp"

namespace sqgw {

double pde_residual(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                    const WaveParams& w) {
  const auto theta = theta_from_psi(psi, p, w);
  const double norm = l2_norm(theta);
  if (norm == 0.0) throw Error(ErrorCode::TrivialTheta, "Theta(Psi) vanishes identically");
  return l2_norm(ws.half_laplacian(psi) - theta) / norm;
}

namespace {

bool touches_outer_ring(const ScalarField& f, double threshold) {
  const auto& g = f.grid();
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j) {
      const bool edge = i == 0 || j == 0 || i + 1 == g.nr || j + 1 == g.nz;
      if (edge && std::abs(f(i, j)) > threshold) return true;
    }
  return false;
}

}  // namespace

double representation_check(const ScalarField& psi, const Profile& p, const WaveParams& w,
                            const WarningSink& warn) {
  const auto theta = theta_from_psi(psi, p, w);
  const double tmax = theta.max_abs();
  if (tmax == 0.0) throw Error(ErrorCode::TrivialTheta, "Theta(Psi) vanishes identically");
  if (touches_outer_ring(theta, 1e-12 * tmax))
    throw Error(ErrorCode::SupportTouchesBoundary, "supp Theta reaches the box boundary");
  const auto potential = free_space_potential(theta, warn);
  const auto& g = psi.grid();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.nr; ++i) {
    if (std::abs(g.r(i)) >= 0.5 * g.Lr) continue;
    for (std::size_t j = 0; j < g.nz; ++j) {
      if (std::abs(g.z(j)) >= 0.5 * g.Lz) continue;
      const double d = psi(i, j) - potential(i, j);
      num += d * d;
      den += psi(i, j) * psi(i, j);
    }
  }
  return std::sqrt(num / den);
}

DecayFit decay_fit(const ScalarField& psi, double support_radius) {
  const auto& g = psi.grid();
  const double h = std::max(g.hr(), g.hz());
  DecayFit fit;
  fit.r_in = 1.5 * support_radius;
  fit.r_out = 0.7 * std::min(g.Lr, g.Lz);
  const auto bins = static_cast<long>(std::floor((fit.r_out - fit.r_in) / h));
  if (bins < 2)
    throw Error(ErrorCode::EmptyDecayWindow, "decay window [1.5 R_support, 0.7 L] is too narrow");
  std::vector<double> mx(static_cast<std::size_t>(bins), 0.0);
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j) {
      const double rad = std::hypot(g.r(i), g.z(j));
      if (rad < fit.r_in) continue;
      const auto b = static_cast<long>(std::floor((rad - fit.r_in) / h));
      if (b >= bins) continue;
      auto& m = mx[static_cast<std::size_t>(b)];
      m = std::max(m, std::abs(psi(i, j)));
    }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (long b = 0; b < bins; ++b) {
    const double m = mx[static_cast<std::size_t>(b)];
    if (!(m > 0.0)) continue;
    const double R = fit.r_in + static_cast<double>(b) * h;
    fit.radii.push_back(R);
    fit.annulus_max.push_back(m);
    const double lx = std::log(R), ly = std::log(m);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw Error(ErrorCode::EmptyDecayWindow, "no nonzero annuli in the decay window");
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

DecayFit decay_fit(const ScalarField& psi, const Profile& p, const WaveParams& w) {
  const auto support = support_report(theta_from_psi(psi, p, w));
  if (support.empty()) throw Error(ErrorCode::TrivialTheta, "Theta(Psi) vanishes identically");
  return decay_fit(psi, support.radius);
}

SupportReport support_report(const ScalarField& theta) {
  const auto& g = theta.grid();
  SupportReport rep;
  const double tmax = theta.max_abs();
  if (tmax == 0.0) return rep;
  const double thr = 1e-12 * tmax;
  auto in = [&](std::size_t i, std::size_t j) { return std::abs(theta(i, j)) > thr; };

  bool first = true;
  rep.axis_gap = g.Lr;
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j) {
      if (!in(i, j)) continue;
      const double r = g.r(i), z = g.z(j);
      if (first) {
        rep.r_min = rep.r_max = r;
        rep.z_min = rep.z_max = z;
        first = false;
      }
      rep.r_min = std::min(rep.r_min, r);
      rep.r_max = std::max(rep.r_max, r);
      rep.z_min = std::min(rep.z_min, z);
      rep.z_max = std::max(rep.z_max, z);
      rep.radius = std::max(rep.radius, std::hypot(r, z));
      if (r > 0.0) {
        rep.area += g.cell_area();
        rep.axis_gap = std::min(rep.axis_gap, r);
      }
    }

  // 4-connected labelling restricted to {r > 0}; the box is periodic in z.
  const std::size_t i0 = g.half_start();
  std::vector<char> seen(g.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = i0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j) {
      if (!in(i, j) || seen[g.index(i, j)]) continue;
      ++rep.components;
      stack.push_back(g.index(i, j));
      seen[g.index(i, j)] = 1;
      while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        const std::size_t ci = idx / g.nz, cj = idx % g.nz;
        auto visit = [&](std::size_t ni, std::size_t nj) {
          const std::size_t nidx = g.index(ni, nj);
          if (!seen[nidx] && in(ni, nj)) {
            seen[nidx] = 1;
            stack.push_back(nidx);
          }
        };
        if (ci > i0) visit(ci - 1, cj);
        if (ci + 1 < g.nr) visit(ci + 1, cj);
        visit(ci, (cj + 1) % g.nz);
        visit(ci, (cj + g.nz - 1) % g.nz);
      }
    }
  return rep;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

bool InequalityReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const auto& c) { return c.status == CheckStatus::Fail; });
}

const InequalityCheck* InequalityReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

InequalityCheck leq(std::string name, double lhs, double rhs, double slack) {
  InequalityCheck c{std::move(name), CheckStatus::Pass, lhs, rhs, ""};
  if (!(lhs <= rhs + slack)) c.status = CheckStatus::Fail;
  return c;
}

InequalityCheck not_applicable(std::string name, std::string why) {
  return {std::move(name), CheckStatus::NotApplicable, 0.0, 0.0, std::move(why)};
}

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q)
    out[static_cast<std::size_t>(q)] = lo * std::pow(hi / lo, static_cast<double>(q) / (n - 1));
  return out;
}

}  // namespace

InequalityReport inequality_suite(SpectralWorkspace& ws, const ScalarField& psi,
                                  const Profile& p, const WaveParams& w, double rel_tol) {
  InequalityReport rep;
  const auto& g = psi.grid();
  const auto point = evaluate_point(ws, psi, p, w);
  const double norm2 = point.norm2;
  const double E = point.energy;
  rep.nehari_member = norm2 > 0.0 && point.is_member();
  const std::string gate = "not a Nehari point";

  if (rep.nehari_member) {
    rep.checks.push_back(leq("nehari_bound", norm2, 6.0 * E, 1e-10 * norm2));

    if (p.kind() == ProfileKind::Quadratic) {
      const double lifted = integrate_half(
          psi, [&](double v, double r, double) { return (w.c * r + w.k) * p.f(v - w.c * r - w.k); });
      const double rhs = norm2 / 6.0 + (2.0 / 3.0) * lifted;
      InequalityCheck c{"quadratic_identity", CheckStatus::Pass, E, rhs, ""};
      if (std::abs(E - rhs) > 1e-10 * std::abs(E)) c.status = CheckStatus::Fail;
      rep.checks.push_back(c);
    } else {
      rep.checks.push_back(not_applicable("quadratic_identity", "profile is not quadratic"));
    }

    // d/dt E(t Psi) = 2 t g(t); E(t Psi) on the ray is a cubic-like curve in t,
    // evaluated without extra transforms.
    double worst = -INFINITY;
    for (double t : geometric(1e-2, 1e2, 50)) {
      const double V = integrate_half(
          psi, [&](double v, double r, double) { return p.eval(t * v - w.c * r - w.k).F; });
      worst = std::max(worst, 0.5 * t * t * norm2 - 2.0 * V);
    }
    rep.checks.push_back(leq("fibre_maximum", worst, E, rel_tol * std::abs(E)));

    const double E_dagger = project_to_nehari(ws, dagger(psi), p, w).energy;
    rep.checks.push_back(leq("dagger_descent", E_dagger, E, rel_tol * std::abs(E)));

    const double E_sharp = project_to_nehari(ws, steiner_z(dagger(psi)), p, w).energy;
    rep.checks.push_back(leq("steiner_descent", E_sharp, E, rel_tol * std::abs(E)));
  } else {
    for (const char* name :
         {"nehari_bound", "quadratic_identity", "fibre_maximum", "dagger_descent", "steiner_descent"})
      rep.checks.push_back(not_applicable(name, gate));
  }

  {
    double lhs = 0.0, rhs = 0.0;
    const double k4 = std::pow(w.k, 4);
    for (std::size_t i = g.half_start(); i < g.nr; ++i) {
      const double level = w.c * g.r(i) + w.k;
      for (std::size_t j = 0; j < g.nz; ++j) {
        const double v = psi(i, j);
        if (v > level) lhs += k4;
        rhs += v * v * v * v;
      }
    }
    rep.checks.push_back(leq("omega_area", lhs * g.cell_area(), rhs * g.cell_area(), 0.0));
  }

  // Tail envelopes on the Steiner-symmetrised field.
  const auto sharp = steiner_z(dagger(psi));
  const auto T = truncation(sharp, w);
  const double l4 = integrate_half(sharp, [](double v, double, double) { return v * v * v * v; });
  {
    // A column that is symmetric decreasing in z satisfies T(z) <= |T|_1 / (2|z|),
    // so the tail beyond R is at most sum_r h |T(r,.)|_1^2 / (2 (R - h/2)).
    double l1sq = 0.0;
    for (std::size_t i = g.half_start(); i < g.nr; ++i) {
      double l1 = 0.0;
      for (std::size_t j = 0; j < g.nz; ++j) l1 += T(i, j) * g.hz();
      l1sq += l1 * l1 * g.hr();
    }
    const auto radii = geometric(1.0, 0.7 * g.Lz, 5);
    InequalityCheck c{"tail_z", CheckStatus::Pass, 0.0, 0.0, ""};
    double worst_ratio = 0.0;
    for (double R : radii) {
      const double tail = integrate_half(
          T, [&](double v, double, double z) { return std::abs(z) >= R ? v * v : 0.0; });
      const double bound = l1sq / (2.0 * (R - 0.5 * g.hz()));
      if (tail > bound * (1.0 + rel_tol)) c.status = CheckStatus::Fail;
      if (bound > 0.0 && tail / bound >= worst_ratio) {
        worst_ratio = tail / bound;
        c.lhs = tail;
        c.rhs = bound;
      }
    }
    rep.checks.push_back(c);
  }
  {
    const auto radii = geometric(1.0, 0.7 * g.Lr, 5);
    InequalityCheck c{"tail_r", CheckStatus::Pass, 0.0, 0.0, ""};
    double worst_ratio = 0.0;
    for (double R : radii) {
      const double tail = integrate_half(
          T, [&](double v, double r, double) { return r >= R ? v * v : 0.0; });
      const double bound = l4 / ((w.c * R + w.k) * (w.c * R + w.k));
      if (tail > bound * (1.0 + rel_tol)) c.status = CheckStatus::Fail;
      if (bound > 0.0 && tail / bound >= worst_ratio) {
        worst_ratio = tail / bound;
        c.lhs = tail;
        c.rhs = bound;
      }
    }
    rep.checks.push_back(c);
  }
  return rep;
}

int count_monotone_violations(const ScalarField& v, double tol) {
  const auto& g = v.grid();
  int count = 0;
  const std::size_t mid = g.nz / 2;
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    for (std::size_t j = mid; j + 1 < g.nz; ++j)
      if (std::abs(v(i, j + 1)) > std::abs(v(i, j)) + tol) ++count;
    for (std::size_t j = mid - 1; j > 0; --j)
      if (std::abs(v(i, j - 1)) > std::abs(v(i, j)) + tol) ++count;
  }
  return count;
}

bool VerifyReport::passed() const {
  return std::all_of(flags.begin(), flags.end(), [](const Flag& f) { return f.passed; });
}

VerifyReport verify_solution(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                             const WaveParams& w, const VerifyTolerances& tol) {
  VerifyReport rep;
  WarningSink sink = [&rep](std::string_view msg) { rep.warnings.emplace_back(msg); };
  const auto& g = psi.grid();
  const auto theta = theta_from_psi(psi, p, w);
  const double tmax = theta.max_abs();
  rep.theta_l2 = l2_norm(theta);
  rep.energy = energy(ws, psi, p, w).E;
  rep.residual_rel = pde_residual(ws, psi, p, w);
  rep.support = support_report(theta);
  rep.odd_r_residual = odd_r_residual(theta);
  rep.even_z_residual = even_z_residual(theta);
  const auto grads = ws.spectral_gradients(theta);
  double grad_max = 0.0;
  for (std::size_t n = 0; n < theta.size(); ++n)
    grad_max = std::max(grad_max, std::hypot(grads.grad.r[n], grads.grad.z[n]));
  rep.even_z_bound = std::max(g.hr(), g.hz()) * grad_max;
  rep.monotone_violations = count_monotone_violations(theta, 1e-12 * tmax);
  for (std::size_t i = g.half_start(); i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j)
      if (theta(i, j) < -1e-12 * tmax) ++rep.sign_violations;

  try {
    rep.representation_rel = representation_check(psi, p, w, sink);
  } catch (const Error& e) {
    rep.representation_rel = INFINITY;
    rep.warnings.emplace_back(e.what());
  }
  try {
    rep.decay_slope = decay_fit(psi, rep.support.radius).slope;
    rep.decay_available = true;
  } catch (const Error& e) {
    rep.warnings.emplace_back(e.what());
  }
  rep.inequalities = inequality_suite(ws, psi, p, w, tol.inequality_rel);

  rep.flags = {
      {"residual", rep.residual_rel < tol.residual},
      {"representation", rep.representation_rel < tol.representation},
      {"odd_r", rep.odd_r_residual == 0.0},
      {"even_z", rep.even_z_residual <= rep.even_z_bound},
      {"monotone_z", rep.monotone_violations == 0},
      {"nonnegative", rep.sign_violations == 0},
      {"axis_gap", !rep.support.empty() && rep.support.axis_gap >= g.hr()},
      {"nontrivial", rep.theta_l2 > 0.0 && rep.energy > 0.0},
      {"inequalities", rep.inequalities.all_passed()},
  };
  if (tol.require_decay)
    rep.flags.push_back({"decay", rep.decay_available && rep.decay_slope >= tol.decay_min &&
                                      rep.decay_slope <= tol.decay_max});
  return rep;
}

}  // namespace sqgw
