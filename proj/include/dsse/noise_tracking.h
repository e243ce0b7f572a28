#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dsse/bands.h"

namespace dsse {

// Piecewise-linear map from a frame SNR (dB) to a multiplier on the noise
// smoothing factor. Breakpoints are sorted by SNR; the multiplier is held
// flat outside them and must be non-increasing in SNR.
struct AlphaSnrMap {
  std::vector<std::pair<double, double>> points{{0.0, 2.0}, {20.0, 1.0}};

  double at(double snr_db) const;
  void validate() const;

  bool operator==(const AlphaSnrMap&) const = default;
};

struct TrackerParams {
  int subwindow_len = 48;  // frames per sub-window
  int num_subwindows = 8;  // sub-windows in the sliding search window
  double bias = 1.2;       // scales the window minimum (>= 1)
  // Recursive smoothing of band power ahead of the minimum search, in [0, 1).
  // 0 searches the raw per-frame band magnitudes.
  double psd_smoothing = 0.98;
  std::vector<double> alpha;  // per-band noise smoothing factor, in [0, 1]
  AlphaSnrMap alpha_snr_map;

  int window_frames() const { return subwindow_len * num_subwindows; }
  // Throws ConfigError; `alpha` must have num_bands entries.
  void validate(int num_bands) const;

  bool operator==(const TrackerParams&) const = default;
};

// Per-stream tracker memory.
//
// The search window of U sub-windows of L frames is a ring of raw
// observations. While the current sub-window fills slot s, the frames not yet
// overwritten in s are the tail of the expiring sub-window; their suffix
// minima are computed once per rotation. The window minimum is then
//   min(current_min, expiring_suffix[position], min of the other U-1 slots)
// which covers exactly the trailing U*L frames.
struct NoiseState {
  int num_bands = 0;
  int subwindow_len = 0;
  int num_subwindows = 0;

  std::vector<double> history;          // [slot][frame][band]
  std::vector<double> subwindow_mins;   // [slot][band]
  std::vector<double> current_min;      // [band]
  std::vector<double> expiring_suffix;  // [frame][band], suffix minima of the slot being overwritten
  std::vector<double> other_slots_min;  // [band], min over the U-1 complete slots

  std::vector<double> smoothed_power;   // pre-search band power
  std::vector<double> smoothed;         // N(m,k)
  int slot = 0;
  int position = 0;                     // frames written into the current slot
  std::int64_t frame_count = 0;
  std::int64_t power_frames = 0;        // frames seen by smooth_band_power
  bool noise_seeded = false;
};

NoiseState make_noise_state(const TrackerParams& params, int num_bands);

// First-order smoothing of band power. The factor ramps up as n/(n+1) over
// the first frames (a running mean) until it reaches psd_smoothing. Returns
// sqrt of the smoothed power (pass-through when psd_smoothing == 0).
BandVector smooth_band_power(std::span<const double> band_mags, const TrackerParams& params,
                             NoiseState& state);

// Raw estimate N'(m,k) = bias * minimum over the trailing window. The first
// call seeds the whole window with its observation.
BandVector track_raw(std::span<const double> band_mags, const TrackerParams& params,
                     NoiseState& state);

// N(m,k) = N(m-1,k) + alpha(k) * (N'(m,k) - N(m-1,k)); N is seeded with the
// first raw estimate.
BandVector smooth_noise(std::span<const double> raw, NoiseState& state,
                        std::span<const double> alpha_eff);

// base_alpha scaled by map.at(snr_db), clamped to [0, 1].
BandVector effective_alpha(std::span<const double> base_alpha, double snr_db,
                           const AlphaSnrMap& map);

}  // namespace dsse
