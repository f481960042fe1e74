#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqgw/grid.hpp"
#include "sqgw/nehari.hpp"
#include "sqgw/profile.hpp"
#include "sqgw/verify.hpp"

namespace sqgw {

struct SolveOptions {
  int max_iters = 5000;
  double step0 = 1.0;
  double backtrack = 0.5;
  double grad_tol = 1e-5;
  double residual_tol = 1e-4;
  int steiner_every = 1;
  double armijo = 1e-4;
  int max_backtracks = 60;
  bool run_verify = true;

  void validate() const;
};

// Gaussian seed A exp(-((r - r0)^2 + z^2) / sigma^2) minus its mirror image.
struct SeedParams {
  double r0 = 1.0;
  double amplitude_factor = 3.0;  // A = amplitude_factor * (c r0 + k)
  double sigma = 1.0;
};

struct SolveReport {
  double c = 0.0;
  double k = 0.0;
  ScalarField psi;
  ScalarField theta;
  std::vector<double> energy_history;
  std::vector<double> residual_history;
  std::vector<double> grad_history;
  std::vector<double> t_scale_history;
  int iterations = 0;
  bool converged = false;
  bool warm_started = false;
  std::string error;  // non-empty when the case failed (sweep only)
  std::optional<VerifyReport> diagnostics;
};

// Seed, then dagger, steiner_z and Nehari rescaling. Throws NoNehariPoint when
// A <= c r0 + k or the rescaling fails, InvalidArgument for r0 <= 0 or
// sigma <= 2 cells.
ScalarField initialize(SpectralWorkspace& ws, const Profile& p, const WaveParams& w, double r0,
                       double amplitude, double sigma);
ScalarField initialize(SpectralWorkspace& ws, const Profile& p, const WaveParams& w,
                       const SeedParams& seed = {});

// Projected descent on the Nehari set: X-gradient step, dagger, optional
// Steiner pass, Nehari rescale, Armijo backtracking on E. A Steiner pass is
// enforced every steiner_every iterations and once more at the end.
// Throws Stall when backtracking fails max_backtracks times in a row.
SolveReport minimize(SpectralWorkspace& ws, const ScalarField& psi0, const Profile& p,
                     const WaveParams& w, const SolveOptions& opts = {});

// Solves every (c, k) pair in lexicographic order, warm-starting each case
// from the nearest converged case rescaled onto the new Nehari set. Failures
// are recorded in SolveReport::error and the sweep continues.
std::vector<SolveReport> sweep(SpectralWorkspace& ws, const Profile& p,
                               const std::vector<double>& c_list, const std::vector<double>& k_list,
                               const SolveOptions& opts = {}, const SeedParams& seed = {},
                               bool warm_start = true);

}  // namespace sqgw
