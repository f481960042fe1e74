#include "sqgw/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <numbers>
#include <thread>

namespace sqgw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OddResolution: return "OddResolution";
    case ErrorCode::ResolutionTooSmall: return "ResolutionTooSmall";
    case ErrorCode::NonPositiveExtent: return "NonPositiveExtent";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidWaveParams: return "InvalidWaveParams";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::NoNehariPoint: return "NoNehariPoint";
    case ErrorCode::Stall: return "StallError";
    case ErrorCode::TrivialTheta: return "TrivialTheta";
    case ErrorCode::SupportTouchesBoundary: return "SupportTouchesBoundary";
    case ErrorCode::EmptyDecayWindow: return "EmptyDecayWindow";
    case ErrorCode::PeakAtWindowEdge: return "PeakAtWindowEdge";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Usage: return "UsageError";
  }
  return "Unknown";
}

void GridSpec::validate() const {
  if (nr % 2 != 0 || nz % 2 != 0)
    throw Error(ErrorCode::OddResolution, "nr and nz must be even (got " + std::to_string(nr) +
                                              " x " + std::to_string(nz) + ")");
  if (nr < 8 || nz < 8)
    throw Error(ErrorCode::ResolutionTooSmall, "nr and nz must be at least 8");
  if (!(Lr > 0.0) || !(Lz > 0.0) || !std::isfinite(Lr) || !std::isfinite(Lz))
    throw Error(ErrorCode::NonPositiveExtent, "Lr and Lz must be positive and finite");
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw Error(ErrorCode::GridMismatch, "value count does not match grid");
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid()) || a.size() != b.size())
    throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += other.values_[n];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= other.values_[n];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::axpy(double a, const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += a * other.values_[n];
  return *this;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

double integrate_product(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) sum += a[n] * b[n];
  return sum * a.grid().cell_area();
}

double l2_norm(const ScalarField& a) { return std::sqrt(integrate_product(a, a)); }

double mean(const ScalarField& a) {
  double sum = 0.0;
  for (double v : a.values()) sum += v;
  return sum / static_cast<double>(a.size());
}

double odd_r_residual(const ScalarField& a) {
  const auto& g = a.grid();
  double res = 0.0;
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j)
      res = std::max(res, std::abs(a(i, j) + a(g.mirror_r(i), j)));
  return res;
}

double even_z_residual(const ScalarField& a) {
  const auto& g = a.grid();
  double res = 0.0;
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j)
      res = std::max(res, std::abs(a(i, j) - a(i, g.mirror_z(j))));
  return res;
}

// ---------------------------------------------------------------------------
// FFTW plumbing

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void init_fftw_threads() {
  static std::once_flag once;
  std::call_once(once, [] { fftw_init_threads(); });
}

struct FftPair {
  std::size_t n0 = 0, n1 = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  FftPair(std::size_t a, std::size_t b) : n0(a), n1(b) {
    init_fftw_threads();
    const std::size_t nc = n0 * (n1 / 2 + 1);
    real = fftw_alloc_real(n0 * n1);
    spec = fftw_alloc_complex(nc);
    std::lock_guard lock(planner_mutex());
    fftw_plan_with_nthreads(thread_cap());
    fwd = fftw_plan_dft_r2c_2d(static_cast<int>(n0), static_cast<int>(n1), real, spec,
                               FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(static_cast<int>(n0), static_cast<int>(n1), spec, real,
                               FFTW_ESTIMATE);
  }
  ~FftPair() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(spec);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;
};

// Signed mode index for position m of an axis of length n.
long signed_mode(std::size_t m, std::size_t n) {
  return m <= n / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(n);
}

}  // namespace

int thread_cap() {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SQGW_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) cap = std::min(cap, v);
  }
  return cap;
}

struct SpectralWorkspace::Plans {
  FftPair fft;
  Plans(std::size_t nr, std::size_t nz) : fft(nr, nz) {}
};

SpectralWorkspace::SpectralWorkspace(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  const std::size_t nzc = spectral_nz();
  xi_r_.resize(grid_.nr);
  xi_z_.resize(nzc);
  for (std::size_t m = 0; m < grid_.nr; ++m)
    xi_r_[m] = std::numbers::pi * static_cast<double>(signed_mode(m, grid_.nr)) / grid_.Lr;
  for (std::size_t n = 0; n < nzc; ++n)
    xi_z_[n] = std::numbers::pi * static_cast<double>(n) / grid_.Lz;
  xi_abs_.resize(grid_.nr * nzc);
  for (std::size_t m = 0; m < grid_.nr; ++m)
    for (std::size_t n = 0; n < nzc; ++n)
      xi_abs_[m * nzc + n] = std::hypot(xi_r_[m], xi_z_[n]);
  xi_abs_[0] = 0.0;
  plans_ = std::make_unique<Plans>(grid_.nr, grid_.nz);
}

SpectralWorkspace::~SpectralWorkspace() = default;
SpectralWorkspace::SpectralWorkspace(SpectralWorkspace&&) noexcept = default;
SpectralWorkspace& SpectralWorkspace::operator=(SpectralWorkspace&&) noexcept = default;

SpectralWorkspace make_grid(const GridSpec& spec) {
  spec.validate();
  return SpectralWorkspace(spec);
}

void SpectralWorkspace::check(const ScalarField& f) const {
  if (!(f.grid() == grid_)) throw Error(ErrorCode::GridMismatch, "field not on workspace grid");
  if (!f.all_finite()) throw Error(ErrorCode::NonFinite, "field contains non-finite values");
}

std::vector<std::complex<double>> SpectralWorkspace::forward(const ScalarField& f) {
  check(f);
  auto& fft = plans_->fft;
  std::copy(f.values().begin(), f.values().end(), fft.real);
  fftw_execute(fft.fwd);
  std::vector<std::complex<double>> out(spectral_size());
  const auto* spec = reinterpret_cast<const std::complex<double>*>(fft.spec);
  std::copy(spec, spec + out.size(), out.begin());
  return out;
}

ScalarField SpectralWorkspace::inverse(std::span<const std::complex<double>> spectrum) {
  auto& fft = plans_->fft;
  std::memcpy(fft.spec, spectrum.data(), sizeof(fftw_complex) * spectral_size());
  fftw_execute(fft.bwd);
  ScalarField out(grid_);
  const double norm = 1.0 / static_cast<double>(grid_.size());
  auto v = out.values();
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = fft.real[n] * norm;
  return out;
}

ScalarField SpectralWorkspace::half_laplacian(const ScalarField& f) {
  auto spec = forward(f);
  for (std::size_t n = 0; n < spec.size(); ++n) spec[n] *= xi_abs_[n];
  return inverse(spec);
}

ScalarField SpectralWorkspace::riesz_inverse(const ScalarField& f) {
  auto spec = forward(f);
  const double mean_value = spec[0].real() / static_cast<double>(grid_.size());
  const double rms = l2_norm(f) / std::sqrt(4.0 * grid_.Lr * grid_.Lz);
  if (std::abs(mean_value) > 1e-12 * rms)
    warn("riesz_inverse: input mean " + std::to_string(mean_value) + " dropped (zero mode)");
  spec[0] = 0.0;
  for (std::size_t n = 1; n < spec.size(); ++n) spec[n] /= xi_abs_[n];
  return inverse(spec);
}

ScalarField SpectralWorkspace::neg_laplacian(const ScalarField& f) {
  auto spec = forward(f);
  for (std::size_t n = 0; n < spec.size(); ++n) spec[n] *= xi_abs_[n] * xi_abs_[n];
  return inverse(spec);
}

double SpectralWorkspace::x_inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  return integrate_product(a, half_laplacian(b));
}

double SpectralWorkspace::x_norm2_spectral(const ScalarField& a) {
  const auto spec = forward(a);
  const std::size_t nzc = spectral_nz();
  double sum = 0.0;
  for (std::size_t m = 0; m < grid_.nr; ++m)
    for (std::size_t n = 0; n < nzc; ++n) {
      // r2c stores one of each conjugate pair except at n = 0 and n = nz/2.
      const double weight = (n == 0 || 2 * n == grid_.nz) ? 1.0 : 2.0;
      sum += weight * xi_abs_[m * nzc + n] * std::norm(spec[m * nzc + n]);
    }
  return sum * grid_.cell_area() / static_cast<double>(grid_.size());
}

SpectralGradients SpectralWorkspace::spectral_gradients(const ScalarField& f) {
  const auto spec = forward(f);
  const std::size_t nzc = spectral_nz();
  std::vector<std::complex<double>> dr(spec.size()), dz(spec.size());
  const std::complex<double> I(0.0, 1.0);
  for (std::size_t m = 0; m < grid_.nr; ++m) {
    const bool nyq_r = 2 * m == grid_.nr;
    for (std::size_t n = 0; n < nzc; ++n) {
      const bool nyq_z = 2 * n == grid_.nz;
      const std::size_t k = m * nzc + n;
      dr[k] = nyq_r ? 0.0 : I * xi_r_[m] * spec[k];
      dz[k] = nyq_z ? 0.0 : I * xi_z_[n] * spec[k];
    }
  }
  SpectralGradients out;
  out.grad.r = inverse(dr);
  out.grad.z = inverse(dz);
  out.perp_grad.r = -1.0 * out.grad.z;
  out.perp_grad.z = out.grad.r;
  return out;
}

ScalarField SpectralWorkspace::divergence(const VectorField& v) {
  auto sr = forward(v.r);
  auto sz = forward(v.z);
  const std::size_t nzc = spectral_nz();
  const std::complex<double> I(0.0, 1.0);
  for (std::size_t m = 0; m < grid_.nr; ++m)
    for (std::size_t n = 0; n < nzc; ++n) {
      const std::size_t k = m * nzc + n;
      const std::complex<double> a = 2 * m == grid_.nr ? 0.0 : I * xi_r_[m] * sr[k];
      const std::complex<double> b = 2 * n == grid_.nz ? 0.0 : I * xi_z_[n] * sz[k];
      sr[k] = a + b;
    }
  return inverse(sr);
}

void SpectralWorkspace::dealias_in_place(std::span<std::complex<double>> spectrum) const {
  const std::size_t nzc = spectral_nz();
  const long cut_r = static_cast<long>(grid_.nr / 3);
  const long cut_z = static_cast<long>(grid_.nz / 3);
  for (std::size_t m = 0; m < grid_.nr; ++m) {
    const bool drop_r = std::abs(signed_mode(m, grid_.nr)) > cut_r;
    for (std::size_t n = 0; n < nzc; ++n)
      if (drop_r || static_cast<long>(n) > cut_z) spectrum[m * nzc + n] = 0.0;
  }
}

ScalarField SpectralWorkspace::dealias(const ScalarField& f) {
  auto spec = forward(f);
  dealias_in_place(spec);
  return inverse(spec);
}

ScalarField SpectralWorkspace::interpolate_to(const ScalarField& f, const GridSpec& fine) {
  if (fine.Lr != grid_.Lr || fine.Lz != grid_.Lz || fine.nr < grid_.nr || fine.nz < grid_.nz)
    throw Error(ErrorCode::GridMismatch, "interpolation target must refine the same box");
  const auto spec = forward(f);
  const std::size_t nzc = spectral_nz();
  const std::size_t fnzc = fine.nz / 2 + 1;
  std::vector<std::complex<double>> out(fine.nr * fnzc, 0.0);
  // Nodes are shifted by half a cell relative to the box corner; on the fine
  // grid the corner offset changes, so each mode picks up a phase.
  const double dr = 0.5 * (fine.hr() - grid_.hr());
  const double dz = 0.5 * (fine.hz() - grid_.hz());
  const double scale = static_cast<double>(fine.size()) / static_cast<double>(grid_.size());
  for (std::size_t m = 0; m < grid_.nr; ++m) {
    const long sm = signed_mode(m, grid_.nr);
    if (2 * m == grid_.nr) continue;
    const std::size_t fm = sm >= 0 ? static_cast<std::size_t>(sm)
                                   : static_cast<std::size_t>(static_cast<long>(fine.nr) + sm);
    for (std::size_t n = 0; n < nzc; ++n) {
      if (2 * n == grid_.nz) continue;
      const double phase = xi_r_[m] * dr + xi_z_[n] * dz;
      out[fm * fnzc + n] = scale * spec[m * nzc + n] * std::polar(1.0, phase);
    }
  }
  SpectralWorkspace fine_ws(fine);
  return fine_ws.inverse(out);
}

// ---------------------------------------------------------------------------
// Free-space convolution

double self_cell_integral(double hr, double hz) {
  const double a = 0.5 * hr;
  const double b = 0.5 * hz;
  return 4.0 * (a * std::asinh(b / a) + b * std::asinh(a / b)) / (2.0 * std::numbers::pi);
}

bool support_touches_margin(const ScalarField& f, double margin_fraction, double threshold) {
  const auto& g = f.grid();
  const double mr = margin_fraction * 2.0 * g.Lr;
  const double mz = margin_fraction * 2.0 * g.Lz;
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j) {
      if (std::abs(f(i, j)) <= threshold) continue;
      if (std::abs(g.r(i)) > g.Lr - mr || std::abs(g.z(j)) > g.Lz - mz) return true;
    }
  return false;
}

struct FreeSpaceConvolver::Impl {
  FftPair fft;
  std::vector<std::complex<double>> kernel_hat;
  Impl(std::size_t nr2, std::size_t nz2) : fft(nr2, nz2) {}
};

FreeSpaceConvolver::FreeSpaceConvolver(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  const std::size_t nr2 = 2 * grid_.nr, nz2 = 2 * grid_.nz;
  impl_ = std::make_unique<Impl>(nr2, nz2);
  const double hr = grid_.hr(), hz = grid_.hz();
  const double area = grid_.cell_area();
  for (std::size_t i = 0; i < nr2; ++i) {
    const double x = hr * static_cast<double>(signed_mode(i, nr2));
    for (std::size_t j = 0; j < nz2; ++j) {
      const double y = hz * static_cast<double>(signed_mode(j, nz2));
      const double dist = std::hypot(x, y);
      impl_->fft.real[i * nz2 + j] =
          dist > 0.0 ? area / (2.0 * std::numbers::pi * dist) : self_cell_integral(hr, hz);
    }
  }
  fftw_execute(impl_->fft.fwd);
  const std::size_t nc = nr2 * (nz2 / 2 + 1);
  impl_->kernel_hat.resize(nc);
  const auto* spec = reinterpret_cast<const std::complex<double>*>(impl_->fft.spec);
  std::copy(spec, spec + nc, impl_->kernel_hat.begin());
}

FreeSpaceConvolver::~FreeSpaceConvolver() = default;
FreeSpaceConvolver::FreeSpaceConvolver(FreeSpaceConvolver&&) noexcept = default;
FreeSpaceConvolver& FreeSpaceConvolver::operator=(FreeSpaceConvolver&&) noexcept = default;

ScalarField FreeSpaceConvolver::apply(const ScalarField& density) {
  if (!(density.grid() == grid_))
    throw Error(ErrorCode::GridMismatch, "density not on convolver grid");
  if (warn_ && support_touches_margin(density, 0.1, 1e-12 * density.max_abs()))
    warn_("free_space_potential: support reaches the outer 10% margin of the box");
  auto& fft = impl_->fft;
  const std::size_t nz2 = 2 * grid_.nz;
  std::fill(fft.real, fft.real + fft.n0 * fft.n1, 0.0);
  for (std::size_t i = 0; i < grid_.nr; ++i)
    for (std::size_t j = 0; j < grid_.nz; ++j) fft.real[i * nz2 + j] = density(i, j);
  fftw_execute(fft.fwd);
  const std::size_t nc = impl_->kernel_hat.size();
  auto* spec = reinterpret_cast<std::complex<double>*>(fft.spec);
  for (std::size_t k = 0; k < nc; ++k) spec[k] *= impl_->kernel_hat[k];
  fftw_execute(fft.bwd);
  const double norm = 1.0 / static_cast<double>(fft.n0 * fft.n1);
  ScalarField out(grid_);
  for (std::size_t i = 0; i < grid_.nr; ++i)
    for (std::size_t j = 0; j < grid_.nz; ++j) out(i, j) = fft.real[i * nz2 + j] * norm;
  return out;
}

ScalarField free_space_potential(const ScalarField& density, const WarningSink& warn) {
  FreeSpaceConvolver conv(density.grid());
  conv.set_warning_sink(warn);
  return conv.apply(density);
}

}  // namespace sqgw
