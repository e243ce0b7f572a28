#include "dsse/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <utility>

#include "dsse/errors.h"

namespace dsse {
namespace {

// FFTW's planner is not re-entrant; execution with a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 2 || (n & (n - 1)) != 0) {
    throw ConfigError("FFT length must be a power of two >= 2, got " + std::to_string(n));
  }
  real_ = fftw_alloc_real(static_cast<size_t>(n));
  auto* cplx = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
  complex_ = cplx;
  std::lock_guard<std::mutex> lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_1d(n, real_, cplx, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(n, cplx, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(const RealFft& other) : RealFft(other.n_) {}

RealFft& RealFft::operator=(const RealFft& other) {
  if (this != &other) {
    RealFft copy(other);
    *this = std::move(copy);
  }
  return *this;
}

RealFft::RealFft(RealFft&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      real_(std::exchange(other.real_, nullptr)),
      complex_(std::exchange(other.complex_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)) {}

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    real_ = std::exchange(other.real_, nullptr);
    complex_ = std::exchange(other.complex_, nullptr);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    inverse_plan_ = std::exchange(other.inverse_plan_, nullptr);
  }
  return *this;
}

void RealFft::release() noexcept {
  if (forward_plan_ != nullptr || inverse_plan_ != nullptr) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    if (inverse_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  }
  forward_plan_ = inverse_plan_ = nullptr;
  if (real_ != nullptr) fftw_free(real_);
  if (complex_ != nullptr) fftw_free(complex_);
  real_ = nullptr;
  complex_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const auto n = static_cast<size_t>(n_);
  if (in.size() != n || out.size() != n / 2 + 1) {
    throw UsageError("RealFft::forward: buffer size mismatch");
  }
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  // fftw_complex is layout-compatible with std::complex<double>.
  std::memcpy(out.data(), complex_, out.size_bytes());
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  const auto n = static_cast<size_t>(n_);
  if (in.size() != n / 2 + 1 || out.size() != n) {
    throw UsageError("RealFft::inverse: buffer size mismatch");
  }
  std::memcpy(complex_, in.data(), in.size_bytes());
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (size_t i = 0; i < n; ++i) out[i] = real_[i] * scale;
}

}  // namespace dsse
