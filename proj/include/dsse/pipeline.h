#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsse/bands.h"
#include "dsse/config.h"
#include "dsse/framing.h"

namespace dsse {

enum class StageMode { kDual, kSingle };

// Scalar SNR handed from Stage-1 to Stage-2: energy-weighted mean of the
// Stage-1 per-band SNRs in dB (each band SNR floored at -100 dB).
struct FrameSnrSummary {
  double snr_db = 0.0;
};

inline constexpr double kSnrFloorDb = -100.0;

FrameSnrSummary summarize_snr(std::span<const double> band_mags, std::span<const double> snr,
                              const BandPlan& plan);

// Per-frame bin gains actually applied to the spectrum (Stage-1 times
// Stage-2), frame-major.
class GainLog {
 public:
  GainLog() = default;
  explicit GainLog(int num_bins) : num_bins_(num_bins) {}

  int num_bins() const { return num_bins_; }
  size_t num_frames() const { return num_bins_ == 0 ? 0 : data_.size() / static_cast<size_t>(num_bins_); }
  std::span<const double> frame(size_t i) const {
    return std::span<const double>(data_).subspan(i * static_cast<size_t>(num_bins_),
                                                  static_cast<size_t>(num_bins_));
  }
  void append(std::span<const double> bin_gains);
  void reserve_frames(size_t n) { data_.reserve(n * static_cast<size_t>(num_bins_)); }

  // Uniform log (every gain = `gain`) with the frame count process_stream
  // produces for `num_samples` input samples.
  static GainLog constant(const FrameConfig& cfg, size_t num_samples, double gain);

 private:
  int num_bins_ = 0;
  std::vector<double> data_;
};

// Number of frames process_stream runs for an input of `num_samples`.
size_t stream_frame_count(const FrameConfig& cfg, size_t num_samples);

struct FrameResult {
  std::span<const double> output;  // hop_len samples, valid until the next call
  FrameSnrSummary stage1_snr;
};

// One dual-stage suppressor per audio stream: HPF, framing, Stage-1 and
// Stage-2 band-domain suppression on one shared spectrum, one synthesis.
// Copyable (a copy is an independent stream with identical state) and
// movable; not safe for concurrent use.
class Suppressor {
 public:
  explicit Suppressor(const PipelineConfig& cfg, StageMode mode = StageMode::kDual);

  const PipelineConfig& config() const { return cfg_; }
  const BandPlan& band_plan() const { return plan_; }
  StageMode mode() const { return mode_; }

  // Processes one frame of frame_len already high-passed samples: one
  // analysis, Stage-1, Stage-2 (dual mode), one synthesis. Throws UsageError
  // on a wrong frame length.
  FrameResult process_frame(std::span<const double> frame);

  // Streaming entry point: high-passes and buffers `samples`, runs every
  // frame that becomes available, appends the emitted hops to `out`.
  // Chunking does not change the output.
  void process(std::span<const double> samples, std::vector<double>& out);

  // When set, every processed frame appends its bin gains to `log`.
  void set_gain_log(GainLog* log) { gain_log_ = log; }

  // Stage-2 smoothing factors for a given Stage-1 SNR (base alpha when the
  // SNR feed is off).
  BandVector stage2_alpha(double stage1_snr_db) const;

  std::span<const double> last_bin_gains() const { return total_bin_gains_; }
  std::span<const double> last_band_gains(int stage) const;
  std::span<const double> last_noise_estimate(int stage) const;  // N(m,k)
  std::span<const double> last_raw_noise(int stage) const;       // N'(m,k)

  std::uint64_t frames_processed() const { return frames_; }
  std::uint64_t forward_transforms() const { return framer_.forward_transforms(); }
  std::uint64_t inverse_transforms() const { return framer_.inverse_transforms(); }

 private:
  struct Stage {
    StageConfig cfg;
    NoiseState noise;
    GainState gain;
    BandVector band_gains;
    BandVector noise_estimate;
    BandVector raw_noise;
  };

  // Suppression and synthesis of the frame already analyzed into spec_.
  FrameResult suppress_and_synthesize();
  // Unit gains, trackers untouched.
  FrameResult pass_frame(std::span<const double> frame);
  // Runs one stage on band magnitudes; returns the per-band SNR.
  BandVector run_stage(Stage& stage, std::span<const double> band_mags,
                       std::span<const double> alpha);

  PipelineConfig cfg_;
  StageMode mode_;
  BandPlan plan_;
  Framer framer_;
  FrameBuffer input_;
  OlaState ola_;
  BiquadCoeffs hpf_;
  BiquadState hpf_state_;
  bool hpf_enabled_;
  Stage stage1_;
  Stage stage2_;

  SpectralFrame spec_;
  std::vector<double> power_scratch_;
  BandVector mags_;
  std::vector<double> stage_bin_gains_;
  std::vector<double> total_bin_gains_;
  std::vector<double> hop_out_;
  std::vector<double> hpf_scratch_;
  GainLog* gain_log_ = nullptr;
  std::uint64_t frames_ = 0;
  int padding_frames_ = 0;  // leading frames that still overlap the start-up padding
};

struct StreamResult {
  std::vector<double> output;  // same length as the input, delayed by the algorithmic latency
  GainLog gains;
};

// Whole-signal processing: chains HPF and process_frame over every frame,
// flushes with zeros and trims to the input length. Empty in, empty out.
StreamResult process_stream(std::span<const double> samples, const PipelineConfig& cfg,
                            bool record_gains = true);

// Same pipeline with Stage-2 disabled, for A/B comparisons.
StreamResult single_stage_process(std::span<const double> samples, const PipelineConfig& cfg,
                                  bool record_gains = true);

// Runs `samples` through the same HPF/framing path as process_stream but
// applies the logged bin gains instead of computing them. Throws UsageError
// if the log's frame count or bin count does not match.
std::vector<double> apply_gain_log(std::span<const double> samples, const GainLog& log,
                                   const FrameConfig& cfg);

}  // namespace dsse
