#include "dsse/gain.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsse/errors.h"

namespace dsse {

void GainParams::validate(int num_bands) const {
  const auto m = static_cast<size_t>(num_bands);
  if (mu.size() != m) throw ConfigError("gain.mu must have one entry per band");
  if (lambda.size() != m) throw ConfigError("gain.lambda must have one entry per band");
  for (double v : mu) {
    if (!(v >= 0.0 && v <= kMaxMu)) throw ConfigError("gain.mu values must lie in [0, 1.5]");
  }
  for (double v : lambda) {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError("gain.lambda values must lie in (0, 1]");
  }
  if (!(gamma_min >= 0.0 && gamma_max <= 1.0 && gamma_min <= gamma_max)) {
    throw ConfigError("gain.gamma_min/gamma_max must satisfy 0 <= min <= max <= 1");
  }
  if (!(noise_floor_eps > 0.0) || !std::isfinite(noise_floor_eps)) {
    throw ConfigError("gain.noise_floor_eps must be positive");
  }
}

GainState make_gain_state(int num_bands) {
  return GainState{std::vector<double>(static_cast<size_t>(num_bands), 1.0)};
}

BandVector compute_snr(std::span<const double> band_mags, std::span<const double> noise,
                       double eps) {
  if (band_mags.size() != noise.size()) throw UsageError("compute_snr: length mismatch");
  BandVector out(band_mags.size());
  for (size_t k = 0; k < out.size(); ++k) {
    const double n = std::max(noise[k], eps);
    out[k] = (band_mags[k] * band_mags[k]) / (n * n);
  }
  return out;
}

BandVector compute_raw_gain(std::span<const double> snr, std::span<const double> mu,
                            std::span<const double> lambda) {
  if (snr.size() != mu.size() || snr.size() != lambda.size()) {
    throw UsageError("compute_raw_gain: length mismatch");
  }
  BandVector out(snr.size());
  for (size_t k = 0; k < out.size(); ++k) {
    double g;
    if (mu[k] == 0.0) {
      g = 1.0;
    } else if (snr[k] > mu[k]) {
      g = std::sqrt(1.0 - mu[k] / snr[k]);
    } else {
      g = lambda[k];
    }
    out[k] = std::clamp(g, lambda[k], 1.0);
  }
  return out;
}

double gamma_of(double raw_gain, double gamma_min, double gamma_max) {
  return gamma_min + (gamma_max - gamma_min) * raw_gain;
}

BandVector smooth_gain(std::span<const double> raw, GainState& state, const GainParams& params) {
  if (raw.size() != state.prev_gain.size() || raw.size() != params.lambda.size()) {
    throw UsageError("smooth_gain: length mismatch");
  }
  for (size_t k = 0; k < raw.size(); ++k) {
    const double gamma = gamma_of(raw[k], params.gamma_min, params.gamma_max);
    double& g = state.prev_gain[k];
    g = std::clamp(g + gamma * (raw[k] - g), params.lambda[k], 1.0);
  }
  return state.prev_gain;
}

}  // namespace dsse
