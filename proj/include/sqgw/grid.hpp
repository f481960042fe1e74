#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sqgw/error.hpp"

namespace sqgw {

// Periodic, cell-centred box [-Lr, Lr) x [-Lz, Lz). Node (i, j) sits at
// r_i = -Lr + (i + 1/2) hr, z_j = -Lz + (j + 1/2) hz, so both mirror maps
// i -> nr-1-i and j -> nz-1-j are exact node pairings and no node lies on an
// axis. Samples are stored row-major with r as the slow index.
struct GridSpec {
  std::size_t nr = 256;
  std::size_t nz = 256;
  double Lr = 20.0;
  double Lz = 20.0;

  // Throws OddResolution / ResolutionTooSmall / NonPositiveExtent.
  void validate() const;

  double hr() const { return 2.0 * Lr / static_cast<double>(nr); }
  double hz() const { return 2.0 * Lz / static_cast<double>(nz); }
  double cell_area() const { return hr() * hz(); }
  double r(std::size_t i) const { return -Lr + (static_cast<double>(i) + 0.5) * hr(); }
  double z(std::size_t j) const { return -Lz + (static_cast<double>(j) + 0.5) * hz(); }
  std::size_t size() const { return nr * nz; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * nz + j; }
  std::size_t mirror_r(std::size_t i) const { return nr - 1 - i; }
  std::size_t mirror_z(std::size_t j) const { return nz - 1 - j; }
  // First r-index of the discrete half plane {r > 0}.
  std::size_t half_start() const { return nr / 2; }

  bool operator==(const GridSpec&) const = default;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}
  ScalarField(const GridSpec& grid, std::vector<double> values);

  template <class Fn>
  static ScalarField from_function(const GridSpec& grid, Fn&& fn) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid.nr; ++i)
      for (std::size_t j = 0; j < grid.nz; ++j)
        out(i, j) = fn(grid.r(i), grid.z(j));
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  // this += a * other
  ScalarField& axpy(double a, const ScalarField& other);

  double max_abs() const;
  bool all_finite() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

struct VectorField {
  ScalarField r;
  ScalarField z;
};

// Cell quadrature of the product of two fields over the whole box.
double integrate_product(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& a);
double mean(const ScalarField& a);

// max |v(i,j) + v(mirror_r(i), j)|: zero for fields odd in r.
double odd_r_residual(const ScalarField& a);
// max |v(i,j) - v(i, mirror_z(j))|: zero for fields even in z.
double even_z_residual(const ScalarField& a);

void require_same_grid(const ScalarField& a, const ScalarField& b);

struct SpectralGradients {
  VectorField grad;       // (d/dr, d/dz)
  VectorField perp_grad;  // (-d/dz, d/dr)
};

// FFT workspace on one grid. Holds FFTW plans and scratch buffers, so a single
// instance must not be shared between concurrent callers.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const GridSpec& grid);
  ~SpectralWorkspace();
  SpectralWorkspace(SpectralWorkspace&&) noexcept;
  SpectralWorkspace& operator=(SpectralWorkspace&&) noexcept;
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const GridSpec& grid() const { return grid_; }
  std::size_t spectral_nz() const { return grid_.nz / 2 + 1; }
  std::size_t spectral_size() const { return grid_.nr * spectral_nz(); }

  // Angular wavenumbers of spectral mode (m, n) in r2c layout.
  double xi_r(std::size_t m) const { return xi_r_[m]; }
  double xi_z(std::size_t n) const { return xi_z_[n]; }
  std::span<const double> xi_abs() const { return xi_abs_; }

  void set_warning_sink(WarningSink sink) { warn_ = std::move(sink); }

  // Unnormalised forward transform (FFTW r2c convention).
  std::vector<std::complex<double>> forward(const ScalarField& f);
  // Normalised inverse: inverse(forward(f)) == f.
  ScalarField inverse(std::span<const std::complex<double>> spectrum);

  // Multiply every mode by a real symbol(xi_r, xi_z).
  template <class Symbol>
  ScalarField apply_multiplier(const ScalarField& f, Symbol&& symbol) {
    auto spec = forward(f);
    const std::size_t nzc = spectral_nz();
    for (std::size_t m = 0; m < grid_.nr; ++m)
      for (std::size_t n = 0; n < nzc; ++n) spec[m * nzc + n] *= symbol(xi_r_[m], xi_z_[n]);
    return inverse(spec);
  }

  // (-Delta)^{1/2}: multiplier |xi|.
  ScalarField half_laplacian(const ScalarField& f);
  // (-Delta)^{-1/2}: multiplier 1/|xi|, zero mode mapped to 0.
  ScalarField riesz_inverse(const ScalarField& f);
  // -Delta: multiplier |xi|^2.
  ScalarField neg_laplacian(const ScalarField& f);

  // <a, b>_X = int a (-Delta)^{1/2} b by cell quadrature.
  double x_inner(const ScalarField& a, const ScalarField& b);
  // Same quantity for a == b evaluated as a weighted spectral sum.
  double x_norm2_spectral(const ScalarField& a);

  SpectralGradients spectral_gradients(const ScalarField& f);
  // d/dr a + d/dz b
  ScalarField divergence(const VectorField& v);

  // 2/3-rule truncation: zero every mode with |m| > nr/3 or |n| > nz/3.
  ScalarField dealias(const ScalarField& f);
  void dealias_in_place(std::span<std::complex<double>> spectrum) const;

  // Trigonometric interpolation onto a finer grid with the same extents.
  ScalarField interpolate_to(const ScalarField& f, const GridSpec& fine);

 private:
  void check(const ScalarField& f) const;
  void warn(std::string_view msg) const {
    if (warn_) warn_(msg);
  }

  GridSpec grid_;
  std::vector<double> xi_r_;
  std::vector<double> xi_z_;
  std::vector<double> xi_abs_;
  WarningSink warn_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

// Validates the spec and builds the workspace.
SpectralWorkspace make_grid(const GridSpec& spec);

// Non-periodic convolution with the kernel 1/(2 pi |x|) on a 2x zero-padded
// grid. Off-diagonal cells use point values of the kernel; the self cell uses
// the exact integral of the kernel over one cell.
class FreeSpaceConvolver {
 public:
  explicit FreeSpaceConvolver(const GridSpec& grid);
  ~FreeSpaceConvolver();
  FreeSpaceConvolver(FreeSpaceConvolver&&) noexcept;
  FreeSpaceConvolver& operator=(FreeSpaceConvolver&&) noexcept;

  void set_warning_sink(WarningSink sink) { warn_ = std::move(sink); }
  ScalarField apply(const ScalarField& density);
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  WarningSink warn_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// int over [-hr/2, hr/2] x [-hz/2, hz/2] of 1/(2 pi |x|).
double self_cell_integral(double hr, double hz);

// True when the support of f (|f| > threshold) reaches into the outer
// margin_fraction of the box on any side.
bool support_touches_margin(const ScalarField& f, double margin_fraction, double threshold);

ScalarField free_space_potential(const ScalarField& density, const WarningSink& warn = {});

// Worker-thread cap from SQGW_THREADS (default: hardware concurrency).
int thread_cap();

}  // namespace sqgw
