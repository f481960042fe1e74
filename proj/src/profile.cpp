#include "sqgw/profile.hpp"

#include <algorithm>
#include <cmath>

namespace sqgw {

namespace {

std::vector<double> antiderivative(const std::vector<double>& c) {
  std::vector<double> out(c.size() + 1, 0.0);
  for (std::size_t d = 0; d < c.size(); ++d) out[d + 1] = c[d] / static_cast<double>(d + 1);
  return out;
}

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

}  // namespace

std::string to_string(ProfileKind kind) {
  return kind == ProfileKind::Bump ? "bump" : "quadratic";
}

ProfileKind parse_profile_kind(const std::string& name) {
  if (name == "bump") return ProfileKind::Bump;
  if (name == "quadratic") return ProfileKind::Quadratic;
  throw Error(ErrorCode::InvalidProfile, "unknown profile kind '" + name + "'");
}

Profile Profile::bump(double a, double b, double amp) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(amp))
    throw Error(ErrorCode::InvalidProfile, "profile parameters must be finite");
  if (a < 0.0) throw Error(ErrorCode::InvalidProfile, "bump start a must be >= 0");
  if (b <= a) throw Error(ErrorCode::InvalidProfile, "bump requires b > a");
  if (amp <= 0.0) throw Error(ErrorCode::InvalidProfile, "bump amplitude must be positive");

  Profile p;
  p.kind_ = ProfileKind::Bump;
  p.a_ = a;
  p.b_ = b;
  p.amp_ = amp;
  // amp u^3 (w - u)^3 expanded in u.
  const double w = b - a;
  const double binom[4] = {1.0, 3.0, 3.0, 1.0};
  std::vector<double> d3(7, 0.0);
  for (int j = 0; j <= 3; ++j)
    d3[3 + j] = amp * binom[j] * std::pow(w, 3 - j) * ((j % 2) ? -1.0 : 1.0);
  p.d2_ = antiderivative(d3);
  p.d1_ = antiderivative(p.d2_);
  p.d0_ = antiderivative(p.d1_);
  p.prim_ = antiderivative(p.d0_);
  p.d2f_b_ = horner(p.d2_, w);
  p.df_b_ = horner(p.d1_, w);
  p.f_b_ = horner(p.d0_, w);
  p.F_b_ = horner(p.prim_, w);
  return p;
}

Profile Profile::default_bump() {
  // With a = 0, b = 1 and amp = 1, f(1) = 1/120 - 3/210 + 3/336 - 1/504 = 1/1008.
  return bump(0.0, 1.0, 1008.0);
}

Profile Profile::quadratic() {
  Profile p;
  p.kind_ = ProfileKind::Quadratic;
  return p;
}

Profile make_profile(ProfileKind kind, double a, double b, double amp) {
  return kind == ProfileKind::Bump ? Profile::bump(a, b, amp) : Profile::quadratic();
}

ProfileValues Profile::eval(double s) const {
  if (!(s > 0.0)) return {};
  if (kind_ == ProfileKind::Quadratic) return {s * s, 2.0 * s, s * s * s / 3.0};
  if (s <= a_) return {};
  if (s <= b_) {
    const double u = s - a_;
    return {horner(d0_, u), horner(d1_, u), horner(prim_, u)};
  }
  const double v = s - b_;
  return {f_b_ + v * (df_b_ + 0.5 * d2f_b_ * v),
          df_b_ + d2f_b_ * v,
          F_b_ + v * (f_b_ + v * (0.5 * df_b_ + d2f_b_ * v / 6.0))};
}

double Profile::third_derivative(double s) const {
  if (kind_ == ProfileKind::Quadratic) return 0.0;
  if (s <= a_ || s >= b_) return 0.0;
  const double u = s - a_;
  const double v = b_ - s;
  return amp_ * u * u * u * v * v * v;
}

void WaveParams::validate() const {
  if (!(c > 0.0) || !std::isfinite(c))
    throw Error(ErrorCode::InvalidWaveParams, "wave speed c must be positive");
  if (!(k > 0.0) || !std::isfinite(k))
    throw Error(ErrorCode::InvalidWaveParams, "cutoff k must be positive");
}

ProfileFunctions functions_of(const Profile& p) {
  return {[p](double s) { return p.eval(s).f; }, [p](double s) { return p.eval(s).df; },
          [p](double s) { return p.eval(s).F; }, [p](double s) { return p.third_derivative(s); }};
}

bool HypothesisReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

HypothesisReport validate_hypotheses(const Profile& p) { return validate_hypotheses(functions_of(p)); }

HypothesisReport validate_hypotheses(const ProfileFunctions& fns) {
  constexpr int kSamples = 2000;
  constexpr double kLo = 1e-4, kHi = 1e3;
  std::vector<double> s(kSamples);
  for (int n = 0; n < kSamples; ++n)
    s[n] = kLo * std::pow(kHi / kLo, static_cast<double>(n) / (kSamples - 1));

  HypothesisReport report;

  HypothesisCheck h1{"H1 nontrivial", false, 0.0, ""};
  for (double x : s)
    if (fns.f(x) != 0.0) h1.passed = true;
  if (!h1.passed) h1.detail = "f vanishes on every sample";
  report.checks.push_back(h1);

  HypothesisCheck h2{"H2 f(s)=0 for s<=0", true, 0.0, ""};
  for (double x : {-1e3, -10.0, -1.0, -1e-3, -1e-12, 0.0}) {
    if (fns.f(x) != 0.0 || fns.df(x) != 0.0 || fns.F(x) != 0.0) {
      h2.passed = false;
      h2.detail = "nonzero value at s = " + std::to_string(x);
    }
  }
  report.checks.push_back(h2);

  HypothesisCheck h3{"H3 f'''>=0", true, 0.0, ""};
  for (double x : s) {
    const double v = fns.d3f(x);
    if (v < 0.0) {
      h3.passed = false;
      h3.worst = std::min(h3.worst, v);
    }
  }
  report.checks.push_back(h3);

  HypothesisCheck dert{"s f' - 2 f >= 0", true, 0.0, ""};
  HypothesisCheck integ{"s f - 3 F >= 0", true, 0.0, ""};
  HypothesisCheck mono{"f' >= 0", true, 0.0, ""};
  for (double x : s) {
    const double f = fns.f(x), df = fns.df(x), F = fns.F(x);
    const double m1 = x * df - 2.0 * f;
    const double eps1 = 1e-12 * (std::abs(x * df) + 2.0 * std::abs(f));
    if (m1 < -eps1) {
      dert.passed = false;
      dert.worst = std::min(dert.worst, m1);
    }
    const double m2 = x * f - 3.0 * F;
    const double eps2 = 1e-12 * (std::abs(x * f) + 3.0 * std::abs(F));
    if (m2 < -eps2) {
      integ.passed = false;
      integ.worst = std::min(integ.worst, m2);
    }
    if (df < 0.0) {
      mono.passed = false;
      mono.worst = std::min(mono.worst, df);
    }
  }
  report.checks.push_back(dert);
  report.checks.push_back(integ);
  report.checks.push_back(mono);

  // Least-squares slope of log f vs log s over the top decade.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (double x : s) {
    if (x < kHi / 10.0) continue;
    const double f = fns.f(x);
    if (!(f > 0.0)) continue;
    const double lx = std::log(x), ly = std::log(f);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  HypothesisCheck h4{"H4 growth exponent < 3", false, 0.0, ""};
  if (count >= 2) {
    report.fitted_nu = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    h4.passed = report.fitted_nu < 3.0;
    h4.detail = "fitted nu = " + std::to_string(report.fitted_nu);
  } else {
    h4.detail = "f not positive on the fit window";
  }
  report.checks.push_back(h4);
  return report;
}

ScalarField theta_from_psi(const ScalarField& psi, const Profile& p, const WaveParams& w) {
  const auto& g = psi.grid();
  const double scale = psi.max_abs();
  if (odd_r_residual(psi) > 1e-10 * scale)
    throw Error(ErrorCode::SymmetryViolation, "theta_from_psi: psi is not odd in r");
  ScalarField theta(g);
  for (std::size_t i = 0; i < g.nr; ++i) {
    const double r = g.r(i);
    for (std::size_t j = 0; j < g.nz; ++j) {
      const double v = psi(i, j);
      theta(i, j) = r > 0.0 ? p.f(v - w.c * r - w.k) : -p.f(-v + w.c * r - w.k);
    }
  }
  return theta;
}

}  // namespace sqgw
