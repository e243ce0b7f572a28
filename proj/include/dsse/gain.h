#pragma once

#include <span>
#include <vector>

#include "dsse/bands.h"

namespace dsse {

// Largest accepted mu. One passage bounds mu by 1.3, another puts
// communication presets in [1.0, 1.5]; the wider bound is enforced.
inline constexpr double kMaxMu = 1.5;

struct GainParams {
  std::vector<double> mu;      // per-band noise over/under-estimation factor
  std::vector<double> lambda;  // per-band gain floor, in (0, 1]
  double gamma_min = 0.2;      // smoothing factor at G' = 0
  double gamma_max = 0.8;      // smoothing factor at G' = 1
  double noise_floor_eps = 1e-10;

  void validate(int num_bands) const;

  bool operator==(const GainParams&) const = default;
};

// Previous smoothed band gain G(m-1,k). Starts at 1.
struct GainState {
  std::vector<double> prev_gain;
};

GainState make_gain_state(int num_bands);

// SNR(m,k) = |X|^2 / max(N, eps)^2.
BandVector compute_snr(std::span<const double> band_mags, std::span<const double> noise,
                       double eps);

// G' = sqrt(1 - mu/SNR), or lambda where the radicand is not positive;
// clamped to [lambda, 1]. mu == 0 always yields 1.
BandVector compute_raw_gain(std::span<const double> snr, std::span<const double> mu,
                            std::span<const double> lambda);

// gamma = gamma_min + (gamma_max - gamma_min) * G'.
double gamma_of(double raw_gain, double gamma_min, double gamma_max);

// G = G(m-1) + gamma * (G' - G(m-1)), clamped to [lambda, 1]; updates state.
BandVector smooth_gain(std::span<const double> raw, GainState& state, const GainParams& params);

}  // namespace dsse
