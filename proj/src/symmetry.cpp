#include "sqgw/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sqgw {

ScalarField dagger(const ScalarField& psi) {
  const auto& g = psi.grid();
  ScalarField out(g);
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    const std::size_t im = g.mirror_r(i);
    for (std::size_t j = 0; j < g.nz; ++j) {
      const double v = std::max(psi(i, j), 0.0);
      out(i, j) = v;
      out(im, j) = -v;
    }
  }
  return out;
}

std::vector<std::size_t> steiner_slot_order(std::size_t nz) {
  // Cell-centred slots pair up as (nz/2 + q, nz/2 - 1 - q) at |z| = (q + 1/2) hz.
  std::vector<std::size_t> order;
  order.reserve(nz);
  for (std::size_t q = 0; q < nz / 2; ++q) {
    order.push_back(nz / 2 + q);
    order.push_back(nz / 2 - 1 - q);
  }
  return order;
}

ScalarField steiner_z(const ScalarField& psi) {
  const auto& g = psi.grid();
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    const std::size_t im = g.mirror_r(i);
    for (std::size_t j = 0; j < g.nz; ++j) {
      if (psi(i, j) < 0.0 || psi(im, j) != -psi(i, j))
        throw Error(ErrorCode::PreconditionViolation, "steiner_z requires a dagger-fixed field");
    }
  }
  const auto slots = steiner_slot_order(g.nz);
  ScalarField out(g);
  std::vector<double> column(g.nz);
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    for (std::size_t j = 0; j < g.nz; ++j) column[j] = psi(i, j);
    std::sort(column.begin(), column.end(), std::greater<>());
    const std::size_t im = g.mirror_r(i);
    for (std::size_t q = 0; q < g.nz; ++q) {
      out(i, slots[q]) = column[q];
      out(im, slots[q]) = -column[q];
    }
  }
  return out;
}

ScalarField symmetry_project(const ScalarField& psi, MirrorSymmetry which) {
  const auto& g = psi.grid();
  ScalarField out(g);
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j) {
      out(i, j) = which == MirrorSymmetry::OddR
                      ? 0.5 * (psi(i, j) - psi(g.mirror_r(i), j))
                      : 0.5 * (psi(i, j) + psi(i, g.mirror_z(j)));
    }
  return out;
}

std::size_t HalfPlaneMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), true));
}

OmegaSet omega_mask(const ScalarField& psi, const WaveParams& w) {
  const auto& g = psi.grid();
  OmegaSet out{{g, std::vector<bool>(g.size(), false)}, 0.0};
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    const double level = w.c * g.r(i) + w.k;
    for (std::size_t j = 0; j < g.nz; ++j)
      if (psi(i, j) > level) out.mask.inside[g.index(i, j)] = true;
  }
  out.area = static_cast<double>(out.mask.count()) * g.cell_area();
  return out;
}

ScalarField truncation(const ScalarField& psi, const WaveParams& w) {
  const auto& g = psi.grid();
  ScalarField out(g);
  for (std::size_t i = g.half_start(); i < g.nr; ++i) {
    const double level = w.c * g.r(i) + w.k;
    const std::size_t im = g.mirror_r(i);
    for (std::size_t j = 0; j < g.nz; ++j) {
      const double v = std::max(psi(i, j) - level, 0.0);
      out(i, j) = v;
      out(im, j) = -v;
    }
  }
  return out;
}

}  // namespace sqgw
