#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsse/framing.h"
#include "dsse/pipeline.h"

namespace dsse {

// Frame length of the speech-activity rule used for leveling and for
// labelling speech-active / noise-only regions.
inline constexpr double kLevelFrameMs = 20.0;
inline constexpr double kDefaultActiveThresholdDb = 35.0;
// noise_segment_reduction never reports more than this.
inline constexpr double kMaxReductionDb = 120.0;

struct MixSpec {
  std::span<const double> speech;
  std::span<const double> noise;  // at least as long as speech; the head is used
  int sample_rate_hz = 16000;
  double target_snr_db = 0.0;
  double active_threshold_db = kDefaultActiveThresholdDb;
};

struct MixResult {
  std::vector<double> mix;
  std::vector<double> speech;  // speech component (unscaled copy)
  std::vector<double> noise;   // noise component after scaling
  double noise_scale = 1.0;
};

// Half-open sample range [begin, end).
using SampleRange = std::pair<size_t, size_t>;

// Level frames (kLevelFrameMs, non-overlapping) whose RMS is within
// active_threshold_db of the loudest frame. Throws InputError on silence.
std::vector<bool> active_level_frames(std::span<const double> speech, int sample_rate_hz,
                                      double active_threshold_db);
size_t level_frame_len(int sample_rate_hz);

// Mean power of `speech` over its active frames.
double active_speech_power(std::span<const double> speech, int sample_rate_hz,
                           double active_threshold_db);

// 10*log10(active speech power / noise power).
double measure_snr_db(std::span<const double> speech, std::span<const double> noise,
                      int sample_rate_hz, double active_threshold_db);

// Scales the noise so active speech power over noise power hits the target.
// Throws InputError for a non-finite target, silent or too little active
// speech (< 1 s), or silent noise; UsageError if the noise is too short.
MixResult mix_at_snr(const MixSpec& spec);

struct SnriReport {
  double input_snr_db = 0.0;
  double output_snr_db = 0.0;
  double snri_db = 0.0;             // output_snr_db - input_snr_db
  double noise_reduction_db = 0.0;  // NaN when the speech has no pauses
};

// Replays `gain_log` separately on the speech and noise components and
// compares speech/noise power over speech-active frames before and after.
// Noise reduction is measured on the mix over noise-only frames (inactive
// frames whose neighbours are inactive too). Outputs are compared after
// removing the algorithmic latency. Throws UsageError on a log/signal
// frame-count mismatch.
SnriReport snri_by_gain_shadowing(std::span<const double> speech, std::span<const double> noise,
                                  const GainLog& gain_log, const FrameConfig& cfg,
                                  double active_threshold_db = kDefaultActiveThresholdDb);

// 10*log10(input power / output power) over the union of `ranges`, capped at
// +/-kMaxReductionDb. Throws InputError on empty ranges, UsageError on
// out-of-bounds ranges.
double noise_segment_reduction(std::span<const double> input, std::span<const double> output,
                               std::span<const SampleRange> ranges);

// 100 * (after - before) / before. Throws InputError if before <= 0.
double relative_improvement(double before, double after);

// Frames x bins matrix of 10*log10(power) (floored at -240 dB); frames start
// at sample 0 and advance by hop_len.
std::vector<std::vector<double>> spectrogram_db(std::span<const double> signal,
                                                const FrameConfig& cfg);
std::string spectrogram_csv(const std::vector<std::vector<double>>& rows);

struct EvaluationRow {
  std::string noise_type;
  double target_snr_db = 0.0;
  std::string preset;
  SnriReport report;
  std::string variant;  // "dual" or "single"
  std::string speech;
};

std::string evaluation_csv_header();
std::string evaluation_csv_row(const EvaluationRow& row);

}  // namespace dsse
