#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsse/fft.h"

namespace dsse {

enum class WindowKind { kSqrtHann, kHann, kRectangular };

std::string_view to_string(WindowKind kind);
WindowKind window_kind_from_string(std::string_view name);

// Time/frequency framing parameters. Defaults are the 16 kHz wideband setup:
// 8 ms frames, 50% overlap, zero-padded 256-point FFT, 100 Hz high-pass.
struct FrameConfig {
  int sample_rate_hz = 16000;
  int frame_len = 128;
  int hop_len = 64;
  int fft_len = 256;
  WindowKind window = WindowKind::kSqrtHann;
  std::optional<double> hpf_cutoff_hz = 100.0;  // nullopt disables the HPF

  int num_bins() const { return fft_len / 2 + 1; }

  // Throws ConfigError naming the violated constraint.
  void validate() const;

  bool operator==(const FrameConfig&) const = default;
};

// Half spectrum (bins 0..fft_len/2) of one analysis frame.
struct SpectralFrame {
  std::vector<std::complex<double>> bins;
  std::vector<double> power;  // |bins[i]|^2

  SpectralFrame() = default;
  explicit SpectralFrame(int num_bins) : bins(num_bins), power(num_bins, 0.0) {}

  size_t size() const { return bins.size(); }
  void update_power();
};

// ---------------------------------------------------------------------------
// High-pass pre-filter: one bilinear-transform Butterworth biquad.

struct BiquadCoeffs {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;  // a0 normalized to 1
};

// Transposed direct form II memory. Zero at stream start.
struct BiquadState {
  double z1 = 0.0;
  double z2 = 0.0;
};

// Requires 0 < cutoff_hz < sample_rate_hz / 2. The numerator sums to exactly
// zero, so DC gain is exactly zero.
BiquadCoeffs design_hpf(double cutoff_hz, double sample_rate_hz);

// Streams `in` through the filter into `out` (may alias). Splitting a signal
// across calls with the same state gives bit-identical output.
void hpf_process(std::span<const double> in, std::span<double> out,
                 const BiquadCoeffs& coeffs, BiquadState& state);

// ---------------------------------------------------------------------------
// Analysis / synthesis.

// Overlap-add accumulator: frame_len samples of partially summed output.
struct OlaState {
  std::vector<double> acc;
};

// Weighted overlap-add framer. Holds the window pair and FFT plans for one
// configuration; each stream should own its own Framer (scratch buffers).
//
// Window pairs:
//   sqrt-hann    analysis sqrt-Hann,  synthesis sqrt-Hann
//   hann         analysis Hann,       synthesis rectangular
//   rectangular  analysis rectangular, synthesis rectangular
// The synthesis window is normalized so the overlap-added product of the two
// windows is exactly one at the configured hop.
class Framer {
 public:
  explicit Framer(const FrameConfig& cfg);

  const FrameConfig& config() const { return cfg_; }
  std::span<const double> analysis_window() const { return analysis_window_; }
  std::span<const double> synthesis_window() const { return synthesis_window_; }

  OlaState make_ola_state() const;

  // Windows `frame` (exactly frame_len samples), zero-pads to fft_len and
  // transforms. Throws UsageError on a wrong frame length.
  SpectralFrame analyze(std::span<const double> frame);
  void analyze(std::span<const double> frame, SpectralFrame& out);

  // Inverse transform, synthesis window, overlap-add. Writes the next
  // hop_len fully summed output samples into `out`.
  void synthesize(const SpectralFrame& spec, OlaState& ola, std::span<double> out);
  std::vector<double> synthesize(const SpectralFrame& spec, OlaState& ola);

  std::uint64_t forward_transforms() const { return forward_count_; }
  std::uint64_t inverse_transforms() const { return inverse_count_; }

 private:
  FrameConfig cfg_;
  std::vector<double> analysis_window_;
  std::vector<double> synthesis_window_;
  RealFft fft_;
  std::vector<double> time_scratch_;
  std::uint64_t forward_count_ = 0;
  std::uint64_t inverse_count_ = 0;
};

// Sliding input buffer that cuts a stream into overlapping frames. It is
// primed with algorithmic_latency_samples() zeros, so overlap-add output
// emitted one hop per frame is the input delayed by exactly that latency.
class FrameBuffer {
 public:
  explicit FrameBuffer(const FrameConfig& cfg);

  void push(std::span<const double> samples);
  bool ready() const { return buffered() >= frame_len_; }
  // Oldest frame_len buffered samples. Requires ready().
  std::span<const double> frame() const;
  // Drops one hop from the front.
  void advance();

 private:
  size_t buffered() const { return data_.size() - read_; }

  size_t frame_len_;
  size_t hop_len_;
  std::vector<double> data_;
  size_t read_ = 0;
};

// Maximum relative deviation of sum_k wa[n + k*hop] * ws[n + k*hop] from its
// mean, over one hop period.
double cola_deviation(std::span<const double> analysis, std::span<const double> synthesis,
                      int hop_len);

// Input-to-output delay from framing alone: one frame of fill plus one hop of
// output buffering. Excludes compute time and HPF group delay.
int algorithmic_latency_samples(const FrameConfig& cfg);
double algorithmic_latency_ms(const FrameConfig& cfg);

}  // namespace dsse
