#pragma once

#include <string>
#include <vector>

#include "sqgw/grid.hpp"
#include "sqgw/profile.hpp"

namespace sqgw {

// ||(-Delta)^{1/2} Psi - Theta(Psi)||_2 / ||Theta(Psi)||_2.
// Throws TrivialTheta when Theta vanishes.
double pde_residual(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                    const WaveParams& w);

// Relative L2 difference between Psi and the free-space potential of
// Theta(Psi) over the inner half box |r| < Lr/2, |z| < Lz/2.
// Throws TrivialTheta for Theta == 0 and SupportTouchesBoundary when the
// support reaches the outermost ring of cells.
double representation_check(const ScalarField& psi, const Profile& p, const WaveParams& w,
                            const WarningSink& warn = {});

struct DecayFit {
  double slope = 0.0;
  double r_in = 0.0;
  double r_out = 0.0;
  std::vector<double> radii;
  std::vector<double> annulus_max;
};

// Least-squares slope of log max_{R <= |x| < R+h} |Psi| against log R for
// R in [1.5 support_radius, 0.7 min(Lr, Lz)]. Throws EmptyDecayWindow.
DecayFit decay_fit(const ScalarField& psi, double support_radius);
// Same with the support radius taken from Theta(Psi).
DecayFit decay_fit(const ScalarField& psi, const Profile& p, const WaveParams& w);

struct SupportReport {
  double area = 0.0;       // area of supp Theta within {r > 0}
  double axis_gap = 0.0;   // min r over supp Theta within {r > 0}
  int components = 0;      // 4-connected components within {r > 0}
  double radius = 0.0;     // max |x| over the support
  double r_min = 0.0, r_max = 0.0, z_min = 0.0, z_max = 0.0;  // bounding box
  bool empty() const { return components == 0; }
};

// Support = {|Theta| > 1e-12 max|Theta|}.
SupportReport support_report(const ScalarField& theta);

enum class CheckStatus { Pass, Fail, NotApplicable };
std::string to_string(CheckStatus s);

struct InequalityCheck {
  std::string name;
  CheckStatus status = CheckStatus::NotApplicable;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};

struct InequalityReport {
  std::vector<InequalityCheck> checks;
  bool nehari_member = false;
  bool all_passed() const;  // NotApplicable counts as passed
  const InequalityCheck* find(const std::string& name) const;
};

// Evaluates on one field:
//   nehari_bound      <Psi,Psi>_X <= 6 E                        (Nehari points)
//   quadratic_identity E = <Psi,Psi>_X/6 + 2/3 int_H (cr+k) f    (quadratic f, Nehari points)
//   fibre_maximum     E(t Psi) <= E(Psi) on a log t-grid         (Nehari points)
//   dagger_descent    E(t Psi^dagger Psi^dagger) <= E(Psi)      (Nehari points)
//   steiner_descent   E(t Psi^sharp Psi^sharp) <= E(Psi)        (Nehari points)
//   omega_area        |Omega| k^4 <= int_H Psi^4
//   tail_z            int_{|z|>=R} |T|^2 <= int_{r>0} |T(r,.)|_1^2 dr / (2R - h)
//   tail_r            int_{|r|>=R} |T|^2 <= ||Psi^sharp||_{L4(H)}^4 / (cR+k)^2
InequalityReport inequality_suite(SpectralWorkspace& ws, const ScalarField& psi,
                                  const Profile& p, const WaveParams& w, double rel_tol = 1e-8);

struct VerifyTolerances {
  double residual = 1e-4;
  double representation = 5e-2;
  double decay_min = -1.35;
  double decay_max = -0.7;
  bool require_decay = false;
  double inequality_rel = 1e-8;
};

struct VerifyReport {
  double residual_rel = 0.0;
  double representation_rel = 0.0;
  double decay_slope = 0.0;
  bool decay_available = false;
  SupportReport support;
  double odd_r_residual = 0.0;
  double even_z_residual = 0.0;
  double even_z_bound = 0.0;  // h * max|grad Theta|
  int monotone_violations = 0;
  int sign_violations = 0;
  double energy = 0.0;
  double theta_l2 = 0.0;
  InequalityReport inequalities;
  std::vector<std::string> warnings;

  struct Flag {
    std::string name;
    bool passed = false;
  };
  std::vector<Flag> flags;
  bool passed() const;
};

// Runs every check above on a (presumably converged) field.
VerifyReport verify_solution(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                             const WaveParams& w, const VerifyTolerances& tol = {});

// Number of adjacent pairs along half-columns of {r > 0} where |v| grows with
// |z| by more than tol.
int count_monotone_violations(const ScalarField& v, double tol);

}  // namespace sqgw
