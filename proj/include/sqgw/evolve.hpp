#pragma once

#include <vector>

#include "sqgw/grid.hpp"

namespace sqgw {

struct EvolveOptions {
  double T = 2.0;
  double cfl = 0.5;
  bool dealias = true;
  double snapshot_every = 0.25;

  void validate() const;
};

struct Snapshot {
  double time = 0.0;
  ScalarField theta;
};

struct TrajectoryDiagnostics {
  std::vector<double> times;
  std::vector<double> shape_error;
  std::vector<double> shift;  // unwrapped z-shift relative to the reference
  double fitted_speed = 0.0;
  double l2_drift = 0.0;  // max relative drift of ||theta||_2 over the run
  double l4_drift = 0.0;  // same for ||theta||_4
  double max_shape_error() const;
};

struct EvolveResult {
  ScalarField theta_T;
  std::vector<Snapshot> snapshots;  // includes t = 0 and t = T
  int steps = 0;
  double l2_drift = 0.0;
  double l4_drift = 0.0;
  double odd_r_drift = 0.0;  // max mirror residual / max|theta| over snapshots
};

// u = grad^perp (-Delta)^{-1/2} theta with grad^perp = (-d/dz, d/dr).
VectorField velocity_from_theta(SpectralWorkspace& ws, const ScalarField& theta);

// Classical RK4 for d_t theta = -u . grad theta with dt = cfl h / max|u|
// recomputed every step. Products are dealiased with the 2/3 rule, and theta0
// is projected onto the retained modes first. Throws BlowUp when max|theta|
// grows tenfold.
EvolveResult run_evolution(SpectralWorkspace& ws, const ScalarField& theta0,
                           const EvolveOptions& opts);

// Shift each snapshot in z to best match theta_ref (cross-correlation peak,
// refined to sub-cell accuracy on the trigonometric interpolant), then report
// the relative L2 mismatch and the least-squares speed of the shifts.
// Throws PeakAtWindowEdge when the best shift sits at the edge of the
// +/- (nz/2 - 1) cell search window.
TrajectoryDiagnostics travel_diagnostics(SpectralWorkspace& ws,
                                         const std::vector<Snapshot>& snapshots,
                                         const ScalarField& theta_ref, double c);

// theta(r, z - s) evaluated spectrally.
ScalarField shift_z(SpectralWorkspace& ws, const ScalarField& f, double s);

double lp_norm(const ScalarField& f, int p);

}  // namespace sqgw
