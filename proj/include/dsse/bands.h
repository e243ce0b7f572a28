#pragma once

#include <span>
#include <string>
#include <vector>

#include "dsse/framing.h"

namespace dsse {

// Per-band real values: magnitudes, powers, SNRs or gains depending on use.
using BandVector = std::vector<double>;

// Partition of the half-spectrum bins 0..fft_len/2 into contiguous bands.
// Band k covers bins [edges[k], edges[k+1]).
struct BandPlan {
  int fft_len = 0;
  int sample_rate_hz = 0;
  std::vector<int> edges;          // num_bands + 1 entries, edges.back() == fft_len/2 + 1
  std::vector<double> centers_hz;  // mean bin frequency of each band
  std::vector<double> center_bins; // same, in (fractional) bin units

  int num_bands() const { return static_cast<int>(edges.size()) - 1; }
  int num_bins() const { return edges.empty() ? 0 : edges.back(); }
  int width(int band) const { return edges[band + 1] - edges[band]; }
};

// Critical-band rate in Bark.
double bark(double hz);

// Bark-scale partition into `num_bands` bands. The Bark range of the bin
// centres is split into equal intervals; each interior edge goes to the first
// bin at or above its interval boundary. Collisions are then pushed apart so
// every band has at least one bin, and the widths are reordered ascending so
// a band is never narrower than the one below it.
// Throws ConfigError unless 1 <= num_bands <= fft_len/2 + 1.
BandPlan build_band_plan(int fft_len, int sample_rate_hz, int num_bands);

// Band magnitude = sqrt(mean bin power within the band).
BandVector pool_to_bands(const SpectralFrame& spec, const BandPlan& plan);
void pool_to_bands(std::span<const double> power, const BandPlan& plan, std::span<double> out);

// Linear interpolation of band gains between band centre bins; flat beyond
// the first and last centres. Output length fft_len/2 + 1.
std::vector<double> expand_to_bins(std::span<const double> band_gains, const BandPlan& plan);
void expand_to_bins(std::span<const double> band_gains, const BandPlan& plan,
                    std::span<double> bin_gains);

// Scales every bin by its real gain (phase untouched) and refreshes power.
SpectralFrame apply_gains(const SpectralFrame& spec, std::span<const double> bin_gains);
void apply_gains_in_place(SpectralFrame& spec, std::span<const double> bin_gains);

// CSV dump: band_index,low_bin,high_bin,center_hz (high_bin inclusive).
std::string band_plan_csv(const BandPlan& plan);

}  // namespace dsse
