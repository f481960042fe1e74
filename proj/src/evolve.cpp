#include "sqgw/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace sqgw {

void EvolveOptions::validate() const {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "evolve.T must be positive");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw Error(ErrorCode::InvalidArgument, "evolve.cfl must lie in (0, 1]");
  if (!(snapshot_every > 0.0))
    throw Error(ErrorCode::InvalidArgument, "evolve.snapshot_every must be positive");
}

double TrajectoryDiagnostics::max_shape_error() const {
  double m = 0.0;
  for (double e : shape_error) m = std::max(m, e);
  return m;
}

double lp_norm(const ScalarField& f, int p) {
  double sum = 0.0;
  for (double v : f.values()) sum += std::pow(std::abs(v), p);
  return std::pow(sum * f.grid().cell_area(), 1.0 / p);
}

VectorField velocity_from_theta(SpectralWorkspace& ws, const ScalarField& theta) {
  return ws.spectral_gradients(ws.riesz_inverse(theta)).perp_grad;
}

namespace {

using Spectrum = std::vector<std::complex<double>>;

class Advection {
 public:
  Advection(SpectralWorkspace& ws, bool dealias) : ws_(ws), dealias_(dealias) {}

  // Returns -u . grad theta and stores max|u| of the input state.
  ScalarField operator()(const ScalarField& theta) {
    const auto& g = ws_.grid();
    const std::size_t nzc = ws_.spectral_nz();
    auto th = ws_.forward(theta);
    if (dealias_) ws_.dealias_in_place(th);
    Spectrum ur(th.size()), uz(th.size()), tr(th.size()), tz(th.size());
    const std::complex<double> I(0.0, 1.0);
    const auto xi = ws_.xi_abs();
    for (std::size_t m = 0; m < g.nr; ++m) {
      const bool nyq_r = 2 * m == g.nr;
      for (std::size_t n = 0; n < nzc; ++n) {
        const bool nyq_z = 2 * n == g.nz;
        const std::size_t q = m * nzc + n;
        const std::complex<double> psi = q == 0 ? 0.0 : th[q] / xi[q];
        const std::complex<double> dr = nyq_r ? 0.0 : I * ws_.xi_r(m);
        const std::complex<double> dz = nyq_z ? 0.0 : I * ws_.xi_z(n);
        ur[q] = -dz * psi;
        uz[q] = dr * psi;
        tr[q] = dr * th[q];
        tz[q] = dz * th[q];
      }
    }
    const auto u_r = ws_.inverse(ur);
    const auto u_z = ws_.inverse(uz);
    const auto t_r = ws_.inverse(tr);
    const auto t_z = ws_.inverse(tz);
    ScalarField prod(g);
    umax_ = 0.0;
    for (std::size_t q = 0; q < prod.size(); ++q) {
      prod[q] = -(u_r[q] * t_r[q] + u_z[q] * t_z[q]);
      umax_ = std::max(umax_, std::hypot(u_r[q], u_z[q]));
    }
    if (!dealias_) return prod;
    auto ps = ws_.forward(prod);
    ws_.dealias_in_place(ps);
    return ws_.inverse(ps);
  }

  double last_umax() const { return umax_; }

 private:
  SpectralWorkspace& ws_;
  bool dealias_;
  double umax_ = 0.0;
};

}  // namespace

EvolveResult run_evolution(SpectralWorkspace& ws, const ScalarField& theta0,
                           const EvolveOptions& opts) {
  opts.validate();
  const auto& g = ws.grid();
  const double h = std::min(g.hr(), g.hz());
  Advection rhs(ws, opts.dealias);

  ScalarField theta = opts.dealias ? ws.dealias(theta0) : theta0;
  const double amp0 = theta.max_abs();
  const double l2_0 = lp_norm(theta, 2), l4_0 = lp_norm(theta, 4);

  EvolveResult out;
  auto record = [&](double t) {
    out.snapshots.push_back({t, theta});
    if (l2_0 > 0.0) out.l2_drift = std::max(out.l2_drift, std::abs(lp_norm(theta, 2) - l2_0) / l2_0);
    if (l4_0 > 0.0) out.l4_drift = std::max(out.l4_drift, std::abs(lp_norm(theta, 4) - l4_0) / l4_0);
    if (amp0 > 0.0) out.odd_r_drift = std::max(out.odd_r_drift, odd_r_residual(theta) / amp0);
  };
  record(0.0);

  double t = 0.0;
  double next_snap = std::min(opts.snapshot_every, opts.T);
  while (t < opts.T * (1.0 - 1e-14)) {
    const auto k1 = rhs(theta);
    const double umax = rhs.last_umax();
    double dt = umax > 0.0 ? opts.cfl * h / umax : next_snap - t;
    bool hit_snap = false;
    if (t + dt >= next_snap * (1.0 - 1e-14)) {
      dt = next_snap - t;
      hit_snap = true;
    }
    auto stage = theta;
    stage.axpy(0.5 * dt, k1);
    const auto k2 = rhs(stage);
    stage = theta;
    stage.axpy(0.5 * dt, k2);
    const auto k3 = rhs(stage);
    stage = theta;
    stage.axpy(dt, k3);
    const auto k4 = rhs(stage);
    theta.axpy(dt / 6.0, k1).axpy(dt / 3.0, k2).axpy(dt / 3.0, k3).axpy(dt / 6.0, k4);
    ++out.steps;
    t = hit_snap ? next_snap : t + dt;

    const double amp = theta.max_abs();
    if (!std::isfinite(amp) || amp > 10.0 * amp0)
      throw Error(ErrorCode::BlowUp, "max|theta| grew tenfold at t = " + std::to_string(t));
    if (hit_snap) {
      record(t);
      next_snap = std::min(next_snap + opts.snapshot_every, opts.T);
    }
  }
  out.theta_T = theta;
  return out;
}

ScalarField shift_z(SpectralWorkspace& ws, const ScalarField& f, double s) {
  auto spec = ws.forward(f);
  const auto& g = ws.grid();
  const std::size_t nzc = ws.spectral_nz();
  for (std::size_t m = 0; m < g.nr; ++m)
    for (std::size_t n = 0; n < nzc; ++n) {
      if (2 * n == g.nz) {
        spec[m * nzc + n] *= std::cos(ws.xi_z(n) * s);
        continue;
      }
      spec[m * nzc + n] *= std::polar(1.0, -ws.xi_z(n) * s);
    }
  return ws.inverse(spec);
}

namespace {

// Correlation C(s) = sum_n w_n Re[p_n exp(i xi_n s)] and its first two
// derivatives, where p_n sums snapshot * conj(reference) over r-modes.
struct Correlation {
  std::vector<std::complex<double>> p;
  std::vector<double> xi;

  double value(double s, double* d1 = nullptr, double* d2 = nullptr) const {
    double c = 0.0, c1 = 0.0, c2 = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
      const double wgt = (n == 0 || n + 1 == p.size()) ? 1.0 : 2.0;
      const auto e = p[n] * std::polar(1.0, xi[n] * s);
      c += wgt * e.real();
      c1 -= wgt * xi[n] * e.imag();
      c2 -= wgt * xi[n] * xi[n] * e.real();
    }
    if (d1) *d1 = c1;
    if (d2) *d2 = c2;
    return c;
  }
};

double wrap(double s, double period) { return s - period * std::round(s / period); }

}  // namespace

TrajectoryDiagnostics travel_diagnostics(SpectralWorkspace& ws,
                                         const std::vector<Snapshot>& snapshots,
                                         const ScalarField& theta_ref, double c) {
  const auto& g = ws.grid();
  const std::size_t nzc = ws.spectral_nz();
  const double period = 2.0 * g.Lz;
  const double hz = g.hz();
  const auto ref = ws.forward(theta_ref);
  const double ref_norm = l2_norm(theta_ref);
  if (!(ref_norm > 0.0)) throw Error(ErrorCode::TrivialTheta, "reference profile vanishes");

  TrajectoryDiagnostics out;
  double prev_shift = 0.0;
  double prev_time = 0.0;
  for (const auto& snap : snapshots) {
    require_same_grid(snap.theta, theta_ref);
    if (std::ranges::equal(snap.theta.values(), theta_ref.values())) {
      const double predicted = prev_shift + c * (snap.time - prev_time);
      prev_shift = predicted + wrap(-predicted, period);
      prev_time = snap.time;
      out.times.push_back(snap.time);
      out.shift.push_back(prev_shift);
      out.shape_error.push_back(0.0);
      continue;
    }
    const auto spec = ws.forward(snap.theta);
    Correlation corr;
    corr.p.assign(nzc, 0.0);
    corr.xi.resize(nzc);
    for (std::size_t n = 0; n < nzc; ++n) corr.xi[n] = ws.xi_z(n);
    for (std::size_t m = 0; m < g.nr; ++m)
      for (std::size_t n = 0; n < nzc; ++n)
        corr.p[n] += spec[m * nzc + n] * std::conj(ref[m * nzc + n]);

    // Integer peak over the +/- (nz/2 - 1) window.
    const long half = static_cast<long>(g.nz / 2) - 1;
    long best = 0;
    double best_val = -INFINITY;
    for (long q = -half; q <= half; ++q) {
      const double v = corr.value(static_cast<double>(q) * hz);
      if (v > best_val) {
        best_val = v;
        best = q;
      }
    }
    if (std::abs(best) == half)
      throw Error(ErrorCode::PeakAtWindowEdge, "correlation peak at the edge of the search window");
    const double cm = corr.value(static_cast<double>(best - 1) * hz);
    const double cp = corr.value(static_cast<double>(best + 1) * hz);
    const double denom = cm - 2.0 * best_val + cp;
    double s = static_cast<double>(best) * hz;
    if (denom < 0.0) s += 0.5 * hz * (cm - cp) / denom;
    // Newton refinement on the trigonometric interpolant of the correlation.
    for (int iter = 0; iter < 20; ++iter) {
      double d1 = 0.0, d2 = 0.0;
      corr.value(s, &d1, &d2);
      if (!(d2 < 0.0)) break;
      const double step = std::clamp(-d1 / d2, -0.5 * hz, 0.5 * hz);
      s += step;
      if (std::abs(step) < 1e-15 * period) break;
    }

    // Unwrap against the previous shift advanced at the nominal speed.
    const double predicted = prev_shift + c * (snap.time - prev_time);
    const double unwrapped = predicted + wrap(s - predicted, period);
    prev_shift = unwrapped;
    prev_time = snap.time;

    const auto back = shift_z(ws, snap.theta, -unwrapped);
    out.times.push_back(snap.time);
    out.shift.push_back(unwrapped);
    out.shape_error.push_back(l2_norm(back - theta_ref) / ref_norm);
  }

  const std::size_t n = out.times.size();
  if (n >= 2) {
    double st = 0, ss = 0, stt = 0, sts = 0;
    for (std::size_t q = 0; q < n; ++q) {
      st += out.times[q];
      ss += out.shift[q];
      stt += out.times[q] * out.times[q];
      sts += out.times[q] * out.shift[q];
    }
    const double dn = static_cast<double>(n);
    out.fitted_speed = (dn * sts - st * ss) / (dn * stt - st * st);
  }
  return out;
}

}  // namespace sqgw
