#include "dsse/noise_tracking.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsse/errors.h"

namespace dsse {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_bands(std::span<const double> v, const NoiseState& state, const char* what) {
  if (v.size() != static_cast<size_t>(state.num_bands)) {
    throw UsageError(std::string(what) + ": band vector length does not match tracker state");
  }
}

// Starts filling `state.slot`: snapshot suffix minima of the sub-window it is
// about to overwrite and the minimum over every other slot.
void begin_subwindow(NoiseState& state) {
  const auto m = static_cast<size_t>(state.num_bands);
  const auto len = static_cast<size_t>(state.subwindow_len);
  const auto slot = static_cast<size_t>(state.slot);
  const double* base = state.history.data() + slot * len * m;
  for (size_t k = 0; k < m; ++k) {
    double run = kInf;
    for (size_t j = len; j-- > 0;) {
      run = std::min(run, base[j * m + k]);
      state.expiring_suffix[j * m + k] = run;
    }
    double others = kInf;
    for (size_t s = 0; s < static_cast<size_t>(state.num_subwindows); ++s) {
      if (s != slot) others = std::min(others, state.subwindow_mins[s * m + k]);
    }
    state.other_slots_min[k] = others;
    state.current_min[k] = kInf;
  }
  state.position = 0;
}

}  // namespace

double AlphaSnrMap::at(double snr_db) const {
  if (points.empty()) return 1.0;
  if (snr_db <= points.front().first) return points.front().second;
  if (snr_db >= points.back().first) return points.back().second;
  for (size_t i = 1; i < points.size(); ++i) {
    const auto& [x1, y1] = points[i];
    if (snr_db <= x1) {
      const auto& [x0, y0] = points[i - 1];
      return y0 + (snr_db - x0) / (x1 - x0) * (y1 - y0);
    }
  }
  return points.back().second;
}

void AlphaSnrMap::validate() const {
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& [x, y] = points[i];
    if (!std::isfinite(x) || !std::isfinite(y) || y < 0.0) {
      throw ConfigError("alpha_snr_map: breakpoints must be finite with non-negative multipliers");
    }
    if (i > 0) {
      if (!(x > points[i - 1].first)) {
        throw ConfigError("alpha_snr_map: SNR breakpoints must be strictly increasing");
      }
      if (y > points[i - 1].second) {
        throw ConfigError("alpha_snr_map: multiplier must be non-increasing in SNR");
      }
    }
  }
}

void TrackerParams::validate(int num_bands) const {
  if (subwindow_len < 1) throw ConfigError("tracker.subwindow_len must be >= 1");
  if (num_subwindows < 1) throw ConfigError("tracker.num_subwindows must be >= 1");
  if (!(bias >= 1.0) || !std::isfinite(bias)) throw ConfigError("tracker.bias must be >= 1");
  if (!(psd_smoothing >= 0.0 && psd_smoothing < 1.0)) {
    throw ConfigError("tracker.psd_smoothing must lie in [0, 1)");
  }
  if (alpha.size() != static_cast<size_t>(num_bands)) {
    throw ConfigError("tracker.alpha must have one entry per band (" + std::to_string(num_bands) +
                      ")");
  }
  for (double a : alpha) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("tracker.alpha values must lie in [0, 1]");
  }
  alpha_snr_map.validate();
}

NoiseState make_noise_state(const TrackerParams& params, int num_bands) {
  params.validate(num_bands);
  NoiseState s;
  s.num_bands = num_bands;
  s.subwindow_len = params.subwindow_len;
  s.num_subwindows = params.num_subwindows;
  const auto m = static_cast<size_t>(num_bands);
  s.history.assign(static_cast<size_t>(params.window_frames()) * m, 0.0);
  s.subwindow_mins.assign(static_cast<size_t>(params.num_subwindows) * m, kInf);
  s.current_min.assign(m, kInf);
  s.expiring_suffix.assign(static_cast<size_t>(params.subwindow_len) * m, kInf);
  s.other_slots_min.assign(m, kInf);
  s.smoothed_power.assign(m, 0.0);
  s.smoothed.assign(m, 0.0);
  return s;
}

BandVector smooth_band_power(std::span<const double> band_mags, const TrackerParams& params,
                             NoiseState& state) {
  check_bands(band_mags, state, "smooth_band_power");
  if (params.psd_smoothing == 0.0) return BandVector(band_mags.begin(), band_mags.end());
  // Running mean until it would be smoother than the recursive average, so
  // one unlucky first frame cannot pin the minimum for a whole window.
  const double n = static_cast<double>(state.power_frames);
  const double beta = std::min(params.psd_smoothing, n / (n + 1.0));
  BandVector out(band_mags.size());
  for (size_t k = 0; k < band_mags.size(); ++k) {
    const double p = band_mags[k] * band_mags[k];
    double& sp = state.smoothed_power[k];
    sp = beta * sp + (1.0 - beta) * p;
    out[k] = std::sqrt(sp);
  }
  ++state.power_frames;
  return out;
}

BandVector track_raw(std::span<const double> band_mags, const TrackerParams& params,
                     NoiseState& state) {
  check_bands(band_mags, state, "track_raw");
  if (state.subwindow_len != params.subwindow_len ||
      state.num_subwindows != params.num_subwindows) {
    throw UsageError("track_raw: tracker state was built for a different window");
  }
  const auto m = static_cast<size_t>(state.num_bands);
  const auto len = static_cast<size_t>(state.subwindow_len);

  if (state.frame_count == 0) {
    for (size_t f = 0; f < state.history.size() / m; ++f) {
      std::copy(band_mags.begin(), band_mags.end(), state.history.begin() + f * m);
    }
    for (size_t s = 0; s < static_cast<size_t>(state.num_subwindows); ++s) {
      std::copy(band_mags.begin(), band_mags.end(), state.subwindow_mins.begin() + s * m);
    }
    state.slot = 0;
    begin_subwindow(state);
  } else if (state.position == state.subwindow_len) {
    std::copy(state.current_min.begin(), state.current_min.end(),
              state.subwindow_mins.begin() + static_cast<size_t>(state.slot) * m);
    state.slot = (state.slot + 1) % state.num_subwindows;
    begin_subwindow(state);
  }

  const auto pos = static_cast<size_t>(state.position);
  double* row = state.history.data() + (static_cast<size_t>(state.slot) * len + pos) * m;
  ++state.position;
  const bool tail_left = static_cast<size_t>(state.position) < len;
  const double* tail =
      tail_left ? state.expiring_suffix.data() + static_cast<size_t>(state.position) * m : nullptr;

  BandVector out(m);
  for (size_t k = 0; k < m; ++k) {
    row[k] = band_mags[k];
    state.current_min[k] = std::min(state.current_min[k], band_mags[k]);
    double w = std::min(state.current_min[k], state.other_slots_min[k]);
    if (tail_left) w = std::min(w, tail[k]);
    out[k] = params.bias * w;
  }
  ++state.frame_count;
  return out;
}

BandVector smooth_noise(std::span<const double> raw, NoiseState& state,
                        std::span<const double> alpha_eff) {
  check_bands(raw, state, "smooth_noise");
  check_bands(alpha_eff, state, "smooth_noise");
  if (!state.noise_seeded) {
    std::copy(raw.begin(), raw.end(), state.smoothed.begin());
    state.noise_seeded = true;
  } else {
    for (size_t k = 0; k < raw.size(); ++k) {
      double& n = state.smoothed[k];
      n = n + alpha_eff[k] * (raw[k] - n);
    }
  }
  return state.smoothed;
}

BandVector effective_alpha(std::span<const double> base_alpha, double snr_db,
                           const AlphaSnrMap& map) {
  const double mult = map.at(snr_db);
  BandVector out(base_alpha.size());
  for (size_t k = 0; k < base_alpha.size(); ++k) {
    out[k] = std::clamp(base_alpha[k] * mult, 0.0, 1.0);
  }
  return out;
}

}  // namespace dsse
