#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sqgw/profile.hpp"

using namespace sqgw;

TEST_CASE("bump third derivative and default normalisation") {
  const auto p = Profile::bump(0.0, 1.0, 1.0);
  CHECK(p.third_derivative(0.5) == doctest::Approx(1.0 / 64.0).epsilon(1e-15));
  CHECK(p.third_derivative(-0.1) == 0.0);
  CHECK(p.third_derivative(1.5) == 0.0);
  CHECK(Profile::default_bump().f(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadratic profile values") {
  const auto q = Profile::quadratic();
  const auto v2 = q.eval(2.0);
  CHECK(v2.f == doctest::Approx(4.0));
  CHECK(v2.F == doctest::Approx(8.0 / 3.0));
  CHECK(v2.df == doctest::Approx(4.0));
  const auto v1 = profile_eval(q, 1.0);
  CHECK(v1.f == 1.0);
  CHECK(v1.df == 2.0);
  CHECK(v1.F == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("all kinds vanish exactly for s <= 0") {
  for (const auto& p : {Profile::default_bump(), Profile::quadratic(), Profile::bump(0.3, 2.0, 5.0)})
    for (double s : {-3.0, -1e-300, 0.0}) {
      const auto v = p.eval(s);
      CHECK(v.f == 0.0);
      CHECK(v.df == 0.0);
      CHECK(v.F == 0.0);
    }
}

TEST_CASE("primitive agrees with adaptive quadrature of f") {
  const auto p = Profile::bump(0.0, 1.0, 1.0);
  for (double s : {0.3, 1.0, 2.0, 7.5}) {
    const double ref = oracle::integrate([&](double x) { return p.f(x); }, 0.0, std::min(s, 1.0), 1e-12) +
                       (s > 1.0 ? oracle::integrate([&](double x) { return p.f(x); }, 1.0, s, 1e-12) : 0.0);
    CHECK(std::abs(p.eval(s).F - ref) <= 1e-9 * std::max(1e-12, std::abs(ref)));
  }
}

TEST_CASE("bump grows quadratically beyond b") {
  const auto p = Profile::default_bump();
  const double a = p.a(), b = p.b(), amp = p.amp();
  // Taylor remainder at b from f''' alone, then the exact quadratic continuation.
  auto d3 = [&](double t) { return amp * std::pow(t - a, 3) * std::pow(b - t, 3); };
  const double f2 = oracle::integrate(d3, a, b, 1e-14);
  const double f1 = oracle::integrate([&](double t) { return (b - t) * d3(t); }, a, b, 1e-14);
  const double f0 = oracle::integrate([&](double t) { return 0.5 * (b - t) * (b - t) * d3(t); }, a, b, 1e-14);
  auto ref = [&](double s) { return f0 + f1 * (s - b) + 0.5 * f2 * (s - b) * (s - b); };

  auto fit = [&](auto&& fn) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 50;
    for (int k = 0; k < n; ++k) {
      const double s = 10.0 * b * std::pow(10.0, static_cast<double>(k) / (n - 1));
      const double x = std::log(s), y = std::log(fn(s));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  const double slope = fit([&](double s) { return p.f(s); });
  CHECK(slope == doctest::Approx(fit(ref)).epsilon(1e-9));
  // Lower-order terms lift the slope on [10b, 100b] above 2.
  CHECK(slope > 2.0);
  CHECK(slope < 2.05);
  for (double s : {10.0, 1e3, 1e6}) CHECK(p.f(s) == doctest::Approx(ref(s)).epsilon(1e-10));
  CHECK(p.f(1e8) / 1e16 == doctest::Approx(0.5 * f2).epsilon(1e-7));
}

TEST_CASE("f, f' and F are mutually consistent") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pick(0.05, 3.0);
  for (const auto& p : {Profile::default_bump(), Profile::bump(0.2, 1.5, 3.0), Profile::quadratic()}) {
    for (int k = 0; k < 20; ++k) {
      const double s = pick(rng), h = 1e-5;
      const auto v = p.eval(s);
      const double dF = (p.eval(s + h).F - p.eval(s - h).F) / (2 * h);
      const double df = (p.eval(s + h).f - p.eval(s - h).f) / (2 * h);
      if (v.f > 1e-8) CHECK(std::abs(dF - v.f) < 1e-6 * std::abs(v.f));
      if (v.df > 1e-8) CHECK(std::abs(df - v.df) < 1e-6 * std::abs(v.df));
    }
  }
}

TEST_CASE("invalid bump parameters") {
  for (auto [a, b, amp] : {std::tuple{1.0, 1.0, 1.0}, {1.0, 0.5, 1.0}, {0.0, 1.0, 0.0}, {0.0, 1.0, -2.0}, {-0.5, 1.0, 1.0}}) {
    try {
      make_profile(ProfileKind::Bump, a, b, amp);
      FAIL("expected InvalidProfile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidProfile);
    }
  }
  CHECK(parse_profile_kind("quadratic") == ProfileKind::Quadratic);
  CHECK_THROWS_AS(parse_profile_kind("cubic"), Error);
}

TEST_CASE("hypothesis validation") {
  const auto rep = validate_hypotheses(Profile::default_bump());
  CHECK(rep.all_passed());
  CHECK(rep.fitted_nu == doctest::Approx(2.0).epsilon(0.01));

  const auto quad = validate_hypotheses(Profile::quadratic());
  CHECK(quad.all_passed());
  for (double s : {0.5, 3.0, 100.0}) {
    const auto v = Profile::quadratic().eval(s);
    CHECK(s * v.df - 2 * v.f == 0.0);
  }

  ProfileFunctions quartic;
  quartic.f = [](double s) { return s > 0 ? s * s * s * s : 0.0; };
  quartic.df = [](double s) { return s > 0 ? 4 * s * s * s : 0.0; };
  quartic.F = [](double s) { return s > 0 ? s * s * s * s * s / 5 : 0.0; };
  quartic.d3f = [](double s) { return s > 0 ? 24 * s : 0.0; };
  const auto bad = validate_hypotheses(quartic);
  CHECK_FALSE(bad.all_passed());
  CHECK(bad.fitted_nu == doctest::Approx(4.0).epsilon(0.01));
  bool h4_failed = false;
  for (const auto& c : bad.checks)
    if (c.name.rfind("H4", 0) == 0) h4_failed = !c.passed;
  CHECK(h4_failed);
}

TEST_CASE("wave parameter validation") {
  CHECK_NOTHROW(WaveParams{1.0, 0.1}.validate());
  CHECK_THROWS_AS(WaveParams({0.0, 0.1}).validate(), Error);
  CHECK_THROWS_AS(WaveParams({1.0, -1.0}).validate(), Error);
}

TEST_CASE("theta_from_psi") {
  const GridSpec g{16, 16, 4, 4};
  const WaveParams w{1.0, 0.1};
  const auto small = ScalarField::from_function(g, [](double r, double) { return 0.01 * r; });
  CHECK(theta_from_psi(small, Profile::default_bump(), w).max_abs() == 0.0);

  // Quadratic: Psi = 3 where c r + k = 1 gives Theta = f(2) = 4.
  const std::size_t i = g.half_start() + 3;
  const WaveParams w1{0.5, 1.0 - 0.5 * g.r(i)};
  auto psi = ScalarField::from_function(g, [](double r, double) { return r; });
  psi(i, 5) = 3.0;
  psi(g.mirror_r(i), 5) = -3.0;
  const auto theta = theta_from_psi(psi, Profile::quadratic(), w1);
  CHECK(theta(i, 5) == doctest::Approx(4.0).epsilon(1e-14));
  for (std::size_t a = 0; a < g.nr; ++a)
    for (std::size_t b = 0; b < g.nz; ++b) CHECK(theta(a, b) == -theta(g.mirror_r(a), b));
  for (std::size_t a = g.half_start(); a < g.nr; ++a)
    for (std::size_t b = 0; b < g.nz; ++b) CHECK(theta(a, b) >= 0.0);

  psi(i, 6) += 1.0;
  try {
    theta_from_psi(psi, Profile::quadratic(), w1);
    FAIL("expected SymmetryViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SymmetryViolation);
  }
}
