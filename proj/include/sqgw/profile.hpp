#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "sqgw/grid.hpp"

namespace sqgw {

enum class ProfileKind { Bump, Quadratic };

std::string to_string(ProfileKind kind);
ProfileKind parse_profile_kind(const std::string& name);

struct ProfileValues {
  double f = 0.0;
  double df = 0.0;  // f'
  double F = 0.0;   // primitive, F(0) = 0
};

// Nonlinearity f of the travelling-wave ansatz.
//
// Bump: f''' = amp (s-a)^3 (b-s)^3 on [a, b] and 0 elsewhere, with
// f(0) = f'(0) = f''(0) = 0. On [a, b] f, f', f'', F are exact polynomials in
// u = s - a; past b, f'' is constant and f grows quadratically.
// Quadratic: f(s) = max(s, 0)^2.
class Profile {
 public:
  static Profile bump(double a, double b, double amp);
  // a = 0, b = 1, amp chosen so that f(1) = 1.
  static Profile default_bump();
  static Profile quadratic();

  ProfileKind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double amp() const { return amp_; }

  ProfileValues eval(double s) const;
  double f(double s) const { return eval(s).f; }
  double third_derivative(double s) const;

 private:
  Profile() = default;

  ProfileKind kind_ = ProfileKind::Quadratic;
  double a_ = 0.0;
  double b_ = 1.0;
  double amp_ = 1.0;
  // Polynomial coefficients in u = s - a, lowest degree first.
  std::vector<double> d2_, d1_, d0_, prim_;
  // Values at s = b, used for the quadratic continuation.
  double f_b_ = 0.0, df_b_ = 0.0, d2f_b_ = 0.0, F_b_ = 0.0;
};

Profile make_profile(ProfileKind kind, double a, double b, double amp);
inline ProfileValues profile_eval(const Profile& p, double s) { return p.eval(s); }

struct WaveParams {
  double c = 1.0;
  double k = 0.1;
  void validate() const;
};

// Evaluators consumed by the hypothesis checker. Profile converts to this;
// tests can inject other nonlinearities.
struct ProfileFunctions {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> F;
  std::function<double(double)> d3f;
};

ProfileFunctions functions_of(const Profile& p);

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // most negative normalised margin seen (0 if none)
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  double fitted_nu = 0.0;
  bool all_passed() const;
};

// Samples s on a log grid in (0, 1e3] and checks f = 0 on s <= 0, f''' >= 0,
// s f' - 2 f >= 0, s f - 3 F >= 0, and the growth exponent nu < 3 fitted on the
// top decade.
HypothesisReport validate_hypotheses(const ProfileFunctions& fns);
HypothesisReport validate_hypotheses(const Profile& p);

// Theta = f(Psi - c r - k) on r > 0 and -f(-Psi + c r - k) on r < 0.
// Throws SymmetryViolation when Psi is not odd in r.
ScalarField theta_from_psi(const ScalarField& psi, const Profile& p, const WaveParams& w);

}  // namespace sqgw
