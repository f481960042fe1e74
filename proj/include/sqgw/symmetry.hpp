#pragma once

#include <vector>

#include "sqgw/grid.hpp"
#include "sqgw/profile.hpp"

namespace sqgw {

// Positive part on {r > 0}, extended oddly to {r < 0}.
ScalarField dagger(const ScalarField& psi);

// Steiner symmetrisation in z of a dagger-fixed field. Every half-column of
// {r > 0} is rearranged so that its values, sorted in decreasing order, fill
// the slots in order of increasing |z| (z > 0 first on ties in |z|); {r < 0}
// is the odd mirror. Per-column value multisets are preserved exactly.
// Throws PreconditionViolation unless psi == dagger(psi).
ScalarField steiner_z(const ScalarField& psi);

// Slot order used by steiner_z for one column of length nz.
std::vector<std::size_t> steiner_slot_order(std::size_t nz);

enum class MirrorSymmetry { OddR, EvenZ };

// Average of mirror pairs with the matching sign.
ScalarField symmetry_project(const ScalarField& psi, MirrorSymmetry which);

// Boolean mask over all nodes; only r > 0 nodes can be set.
struct HalfPlaneMask {
  GridSpec grid;
  std::vector<bool> inside;
  std::size_t count() const;
};

struct OmegaSet {
  HalfPlaneMask mask;
  double area = 0.0;
};

// Omega = {(r, z) in H : Psi > c r + k}.
OmegaSet omega_mask(const ScalarField& psi, const WaveParams& w);

// T(Psi) = (Psi - c r - k)^dagger.
ScalarField truncation(const ScalarField& psi, const WaveParams& w);

// int over {r > 0} of g(Psi(x), r(x)) by cell quadrature.
template <class Fn>
double integrate_half(const ScalarField& psi, Fn&& fn) {
  const auto& g = psi.grid();
  double sum = 0.0;
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    const double r = g.r(i);
    for (std::size_t j = 0; j < g.nz; ++j) sum += fn(psi(i, j), r, g.z(j));
  }
  return sum * g.cell_area();
}

}  // namespace sqgw
