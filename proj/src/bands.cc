#include "dsse/bands.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dsse/errors.h"

namespace dsse {

double bark(double hz) {
  return 13.0 * std::atan(0.00076 * hz) + 3.5 * std::atan((hz / 7500.0) * (hz / 7500.0));
}

BandPlan build_band_plan(int fft_len, int sample_rate_hz, int num_bands) {
  if (fft_len < 2 || (fft_len & (fft_len - 1)) != 0) {
    throw ConfigError("band plan: fft_len must be a power of two");
  }
  if (sample_rate_hz <= 0) throw ConfigError("band plan: sample rate must be positive");
  const int nbins = fft_len / 2 + 1;
  if (num_bands < 1 || num_bands > nbins) {
    throw ConfigError("num_bands must lie in [1, " + std::to_string(nbins) + "], got " +
                      std::to_string(num_bands));
  }

  std::vector<double> z(static_cast<size_t>(nbins));
  for (int i = 0; i < nbins; ++i) {
    z[static_cast<size_t>(i)] = bark(static_cast<double>(i) * sample_rate_hz / fft_len);
  }
  const double z0 = z.front();
  const double range = z.back() - z0;

  std::vector<int> edges(static_cast<size_t>(num_bands) + 1);
  edges.front() = 0;
  edges.back() = nbins;
  for (int j = 1; j < num_bands; ++j) {
    const double target = z0 + range * j / num_bands;
    const auto it = std::find_if(z.begin(), z.end(), [target](double v) { return v >= target; });
    edges[static_cast<size_t>(j)] = static_cast<int>(it - z.begin());
  }
  for (int j = 1; j < num_bands; ++j) {
    edges[j] = std::max(edges[j], edges[j - 1] + 1);
  }
  for (int j = num_bands - 1; j >= 1; --j) {
    edges[j] = std::min(edges[j], edges[j + 1] - 1);
  }

  std::vector<int> widths(static_cast<size_t>(num_bands));
  for (int j = 0; j < num_bands; ++j) widths[j] = edges[j + 1] - edges[j];
  std::sort(widths.begin(), widths.end());

  BandPlan plan;
  plan.fft_len = fft_len;
  plan.sample_rate_hz = sample_rate_hz;
  plan.edges.assign(1, 0);
  for (int w : widths) plan.edges.push_back(plan.edges.back() + w);
  const double bin_hz = static_cast<double>(sample_rate_hz) / fft_len;
  for (int k = 0; k < num_bands; ++k) {
    const double c = 0.5 * (plan.edges[k] + plan.edges[k + 1] - 1);
    plan.center_bins.push_back(c);
    plan.centers_hz.push_back(c * bin_hz);
  }
  return plan;
}

void pool_to_bands(std::span<const double> power, const BandPlan& plan, std::span<double> out) {
  if (power.size() != static_cast<size_t>(plan.num_bins()) ||
      out.size() != static_cast<size_t>(plan.num_bands())) {
    throw UsageError("pool_to_bands: spectrum or output length does not match band plan");
  }
  for (int k = 0; k < plan.num_bands(); ++k) {
    double sum = 0.0;
    for (int i = plan.edges[k]; i < plan.edges[k + 1]; ++i) sum += power[static_cast<size_t>(i)];
    out[static_cast<size_t>(k)] = std::sqrt(sum / plan.width(k));
  }
}

BandVector pool_to_bands(const SpectralFrame& spec, const BandPlan& plan) {
  BandVector out(static_cast<size_t>(plan.num_bands()));
  pool_to_bands(spec.power, plan, out);
  return out;
}

void expand_to_bins(std::span<const double> band_gains, const BandPlan& plan,
                    std::span<double> bin_gains) {
  const int m = plan.num_bands();
  if (band_gains.size() != static_cast<size_t>(m) ||
      bin_gains.size() != static_cast<size_t>(plan.num_bins())) {
    throw UsageError("expand_to_bins: gain vector length does not match band plan");
  }
  const auto& c = plan.center_bins;
  int k = 0;
  for (int i = 0; i < plan.num_bins(); ++i) {
    const double x = i;
    double g;
    if (x <= c.front()) {
      g = band_gains.front();
    } else if (x >= c.back()) {
      g = band_gains.back();
    } else {
      while (c[static_cast<size_t>(k) + 1] < x) ++k;
      const double t = (x - c[k]) / (c[k + 1] - c[k]);
      g = band_gains[k] + t * (band_gains[k + 1] - band_gains[k]);
    }
    bin_gains[static_cast<size_t>(i)] = g;
  }
}

std::vector<double> expand_to_bins(std::span<const double> band_gains, const BandPlan& plan) {
  std::vector<double> out(static_cast<size_t>(plan.num_bins()));
  expand_to_bins(band_gains, plan, out);
  return out;
}

void apply_gains_in_place(SpectralFrame& spec, std::span<const double> bin_gains) {
  if (bin_gains.size() != spec.size()) {
    throw UsageError("apply_gains: gain vector length does not match spectrum");
  }
  for (size_t i = 0; i < spec.size(); ++i) spec.bins[i] *= bin_gains[i];
  spec.update_power();
}

SpectralFrame apply_gains(const SpectralFrame& spec, std::span<const double> bin_gains) {
  SpectralFrame out = spec;
  apply_gains_in_place(out, bin_gains);
  return out;
}

std::string band_plan_csv(const BandPlan& plan) {
  std::ostringstream os;
  os.precision(10);
  os << "band_index,low_bin,high_bin,center_hz\n";
  for (int k = 0; k < plan.num_bands(); ++k) {
    os << k << ',' << plan.edges[k] << ',' << plan.edges[k + 1] - 1 << ','
       << plan.centers_hz[static_cast<size_t>(k)] << '\n';
  }
  return os.str();
}

}  // namespace dsse
