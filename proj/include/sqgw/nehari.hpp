#pragma once

#include <cmath>
#include <vector>

#include "sqgw/grid.hpp"
#include "sqgw/profile.hpp"

namespace sqgw {

struct EnergyParts {
  double E = 0.0;
  double V = 0.0;      // int_H F(Psi - c r - k)
  double norm2 = 0.0;  // <Psi, Psi>_X
};

// E = 1/2 <Psi, Psi>_X - 2 V. Throws SymmetryViolation unless psi is odd in r.
EnergyParts energy(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                   const WaveParams& w);

// X-metric gradient of E: G = Psi - (-Delta)^{-1/2} Theta(Psi), so that
// E'(Psi)(h) = <G, h>_X.
ScalarField euler_gradient(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                           const WaveParams& w);

// E'(Psi)(Psi) = <Psi, Psi>_X - 2 int_H f(Psi - c r - k) Psi.
double nehari_functional(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                         const WaveParams& w);

// The fibre map along the ray t -> t Psi, normalised as
//   g(t) = E'(t Psi)(t Psi) / (2 t^2)
//        = 1/2 <Psi, Psi>_X - (1/t) int_H f(t Psi^dagger - c r - k) Psi^dagger,
// so g(0+) = 1/2 <Psi, Psi>_X and d/dt E(t Psi) = 2 t g(t).
class FiberMap {
 public:
  FiberMap(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p, const WaveParams& w);

  struct Value {
    double g = 0.0;
    double dg = 0.0;
  };
  // Throws InvalidArgument for t <= 0.
  Value operator()(double t) const;

  double norm2() const { return norm2_; }
  bool dagger_vanishes() const { return nodes_.empty(); }

 private:
  struct Node {
    double psi;    // Psi^dagger > 0
    double level;  // c r + k
  };
  const Profile* profile_;
  double norm2_ = 0.0;
  double cell_area_ = 0.0;
  std::vector<Node> nodes_;
};

inline FiberMap::Value g_of_t(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                              const WaveParams& w, double t) {
  return FiberMap(ws, psi, p, w)(t);
}

struct NehariScale {
  double t = 1.0;
  double g = 0.0;
  int iterations = 0;
};

inline constexpr double kNehariTMax = 1e9;
inline constexpr double kNehariRootTol = 1e-12;
inline constexpr double kNehariMembershipTol = 1e-10;

// Unique t > 0 with t Psi on the Nehari set: geometric bracket expansion from
// t = 1 followed by safeguarded Newton. Throws NoNehariPoint when Psi^dagger
// vanishes on {r > 0} or g stays positive up to kNehariTMax.
NehariScale nehari_scale(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                         const WaveParams& w);
NehariScale nehari_scale(const FiberMap& fiber);

struct NehariPoint {
  ScalarField psi;
  double t_scale = 1.0;
  double energy = 0.0;
  double nehari_residual = 0.0;
  double norm2 = 0.0;

  // |E'(Psi)(Psi)| <= tol * <Psi, Psi>_X
  bool is_member(double tol = kNehariMembershipTol) const {
    return std::abs(nehari_residual) <= tol * norm2;
  }
};

// t_Psi Psi together with its energy and Nehari residual.
NehariPoint project_to_nehari(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                              const WaveParams& w);

// Evaluates an existing field without rescaling it.
NehariPoint evaluate_point(SpectralWorkspace& ws, const ScalarField& psi, const Profile& p,
                           const WaveParams& w);

}  // namespace sqgw
