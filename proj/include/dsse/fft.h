#pragma once

#include <complex>
#include <span>

namespace dsse {

// Real-input FFT of fixed power-of-two length backed by FFTW.
// Forward produces the half spectrum (n/2 + 1 bins); inverse is scaled by 1/n
// so inverse(forward(x)) == x.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft& other);
  RealFft& operator=(const RealFft& other);
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  int size() const { return n_; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  void release() noexcept;

  int n_ = 0;
  double* real_ = nullptr;
  void* complex_ = nullptr;  // fftw_complex*
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace dsse
