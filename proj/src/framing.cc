#include "dsse/framing.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dsse/errors.h"

namespace dsse {
namespace {

constexpr double kColaTolerance = 1e-9;

std::vector<double> make_window(WindowKind kind, int len) {
  std::vector<double> w(static_cast<size_t>(len), 1.0);
  if (kind == WindowKind::kRectangular) return w;
  // Periodic windows: they tile exactly at hops that divide the length.
  for (int n = 0; n < len; ++n) {
    const double s = std::sin(std::numbers::pi * n / len);
    w[static_cast<size_t>(n)] = kind == WindowKind::kSqrtHann ? s : s * s;
  }
  return w;
}

}  // namespace

std::string_view to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::kSqrtHann:
      return "sqrt-hann";
    case WindowKind::kHann:
      return "hann";
    case WindowKind::kRectangular:
      return "rectangular";
  }
  return "?";
}

WindowKind window_kind_from_string(std::string_view name) {
  if (name == "sqrt-hann") return WindowKind::kSqrtHann;
  if (name == "hann") return WindowKind::kHann;
  if (name == "rectangular") return WindowKind::kRectangular;
  throw ConfigError("unknown window kind '" + std::string(name) +
                    "' (expected sqrt-hann, hann or rectangular)");
}

void FrameConfig::validate() const {
  if (sample_rate_hz <= 0) throw ConfigError("frame.sample_rate_hz must be positive");
  if (frame_len <= 0) throw ConfigError("frame.frame_len must be positive");
  if (hop_len <= 0 || hop_len > frame_len || frame_len % hop_len != 0) {
    throw ConfigError("frame.hop_len must divide frame.frame_len");
  }
  if (fft_len < 2 || (fft_len & (fft_len - 1)) != 0) {
    throw ConfigError("frame.fft_len must be a power of two");
  }
  if (fft_len < frame_len) throw ConfigError("frame.fft_len must be >= frame.frame_len");
  if (hpf_cutoff_hz) {
    if (!(*hpf_cutoff_hz > 0.0 && *hpf_cutoff_hz < sample_rate_hz / 2.0)) {
      throw ConfigError("frame.hpf_cutoff_hz must lie in (0, sample_rate_hz/2)");
    }
  }
  const auto wa = make_window(window, frame_len);
  const auto ws = window == WindowKind::kSqrtHann ? wa : make_window(WindowKind::kRectangular, frame_len);
  if (cola_deviation(wa, ws, hop_len) > kColaTolerance) {
    throw ConfigError("window '" + std::string(to_string(window)) +
                      "' does not satisfy constant overlap-add at hop " + std::to_string(hop_len));
  }
}

void SpectralFrame::update_power() {
  power.resize(bins.size());
  for (size_t i = 0; i < bins.size(); ++i) power[i] = std::norm(bins[i]);
}

// ---------------------------------------------------------------------------

BiquadCoeffs design_hpf(double cutoff_hz, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0) || !(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0)) {
    throw ConfigError("HPF cutoff must lie in (0, sample_rate/2)");
  }
  // Bilinear transform of the 2nd-order Butterworth prototype with the
  // cutoff prewarped, i.e. Q = 1/sqrt(2).
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double a0 = 1.0 + alpha;
  BiquadCoeffs c;
  c.b0 = (1.0 + cw) / 2.0 / a0;
  c.b1 = -2.0 * c.b0;
  c.b2 = c.b0;
  c.a1 = -2.0 * cw / a0;
  c.a2 = (1.0 - alpha) / a0;
  return c;
}

void hpf_process(std::span<const double> in, std::span<double> out, const BiquadCoeffs& c,
                 BiquadState& state) {
  if (out.size() != in.size()) throw UsageError("hpf_process: output size mismatch");
  double z1 = state.z1;
  double z2 = state.z2;
  for (size_t i = 0; i < in.size(); ++i) {
    const double x = in[i];
    const double y = c.b0 * x + z1;
    z1 = c.b1 * x - c.a1 * y + z2;
    z2 = c.b2 * x - c.a2 * y;
    out[i] = y;
  }
  state.z1 = z1;
  state.z2 = z2;
}

// ---------------------------------------------------------------------------

double cola_deviation(std::span<const double> analysis, std::span<const double> synthesis,
                      int hop_len) {
  const auto len = analysis.size();
  const auto hop = static_cast<size_t>(hop_len);
  std::vector<double> sums(hop, 0.0);
  for (size_t n = 0; n < len; ++n) sums[n % hop] += analysis[n] * synthesis[n];
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= static_cast<double>(hop);
  if (mean <= 0.0) return 1.0;
  double worst = 0.0;
  for (double s : sums) worst = std::max(worst, std::abs(s - mean) / mean);
  return worst;
}

Framer::Framer(const FrameConfig& cfg) : cfg_(cfg), fft_((cfg.validate(), cfg.fft_len)) {
  analysis_window_ = make_window(cfg.window, cfg.frame_len);
  synthesis_window_ = cfg.window == WindowKind::kSqrtHann
                          ? analysis_window_
                          : make_window(WindowKind::kRectangular, cfg.frame_len);
  const auto hop = static_cast<size_t>(cfg.hop_len);
  double overlap_sum = 0.0;
  for (size_t n = 0; n < analysis_window_.size(); ++n) {
    overlap_sum += analysis_window_[n] * synthesis_window_[n];
  }
  const double norm = overlap_sum / static_cast<double>(hop);
  for (double& w : synthesis_window_) w /= norm;
  time_scratch_.assign(static_cast<size_t>(cfg.fft_len), 0.0);
}

OlaState Framer::make_ola_state() const {
  return OlaState{std::vector<double>(static_cast<size_t>(cfg_.frame_len), 0.0)};
}

SpectralFrame Framer::analyze(std::span<const double> frame) {
  SpectralFrame out(cfg_.num_bins());
  analyze(frame, out);
  return out;
}

void Framer::analyze(std::span<const double> frame, SpectralFrame& out) {
  if (frame.size() != static_cast<size_t>(cfg_.frame_len)) {
    throw UsageError("analyze: expected " + std::to_string(cfg_.frame_len) + " samples, got " +
                     std::to_string(frame.size()));
  }
  for (size_t n = 0; n < frame.size(); ++n) time_scratch_[n] = frame[n] * analysis_window_[n];
  std::fill(time_scratch_.begin() + static_cast<std::ptrdiff_t>(frame.size()),
            time_scratch_.end(), 0.0);
  out.bins.resize(static_cast<size_t>(cfg_.num_bins()));
  fft_.forward(time_scratch_, out.bins);
  out.update_power();
  ++forward_count_;
}

void Framer::synthesize(const SpectralFrame& spec, OlaState& ola, std::span<double> out) {
  const auto frame_len = static_cast<size_t>(cfg_.frame_len);
  const auto hop = static_cast<size_t>(cfg_.hop_len);
  if (spec.size() != static_cast<size_t>(cfg_.num_bins())) {
    throw UsageError("synthesize: spectrum has wrong number of bins");
  }
  if (ola.acc.size() != frame_len || out.size() != hop) {
    throw UsageError("synthesize: overlap state or output size mismatch");
  }
  fft_.inverse(spec.bins, time_scratch_);
  ++inverse_count_;
  for (size_t n = 0; n < frame_len; ++n) ola.acc[n] += time_scratch_[n] * synthesis_window_[n];
  std::copy_n(ola.acc.begin(), hop, out.begin());
  std::copy(ola.acc.begin() + static_cast<std::ptrdiff_t>(hop), ola.acc.end(), ola.acc.begin());
  std::fill(ola.acc.end() - static_cast<std::ptrdiff_t>(hop), ola.acc.end(), 0.0);
}

std::vector<double> Framer::synthesize(const SpectralFrame& spec, OlaState& ola) {
  std::vector<double> out(static_cast<size_t>(cfg_.hop_len));
  synthesize(spec, ola, out);
  return out;
}

FrameBuffer::FrameBuffer(const FrameConfig& cfg)
    : frame_len_(static_cast<size_t>(cfg.frame_len)),
      hop_len_(static_cast<size_t>(cfg.hop_len)),
      data_(static_cast<size_t>(algorithmic_latency_samples(cfg)), 0.0) {}

void FrameBuffer::push(std::span<const double> samples) {
  if (read_ > 0 && read_ >= data_.size() / 2) {
    data_.erase(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(read_));
    read_ = 0;
  }
  data_.insert(data_.end(), samples.begin(), samples.end());
}

std::span<const double> FrameBuffer::frame() const {
  if (!ready()) throw UsageError("FrameBuffer::frame: not enough buffered samples");
  return std::span<const double>(data_).subspan(read_, frame_len_);
}

void FrameBuffer::advance() {
  if (!ready()) throw UsageError("FrameBuffer::advance: not enough buffered samples");
  read_ += hop_len_;
}

int algorithmic_latency_samples(const FrameConfig& cfg) { return cfg.frame_len + cfg.hop_len; }

double algorithmic_latency_ms(const FrameConfig& cfg) {
  return 1000.0 * algorithmic_latency_samples(cfg) / cfg.sample_rate_hz;
}

}  // namespace dsse
