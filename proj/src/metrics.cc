#include "dsse/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dsse/errors.h"

namespace dsse {
namespace {

double power_over(std::span<const double> x, size_t begin, size_t end) {
  double acc = 0.0;
  for (size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return acc;
}

double ratio_db(double num, double den) {
  if (num <= 0.0 && den <= 0.0) return 0.0;
  if (den <= 0.0) return kMaxReductionDb;
  if (num <= 0.0) return -kMaxReductionDb;
  return std::clamp(10.0 * std::log10(num / den), -kMaxReductionDb, kMaxReductionDb);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

size_t level_frame_len(int sample_rate_hz) {
  return static_cast<size_t>(std::lround(sample_rate_hz * kLevelFrameMs / 1000.0));
}

std::vector<bool> active_level_frames(std::span<const double> speech, int sample_rate_hz,
                                      double active_threshold_db) {
  const size_t len = level_frame_len(sample_rate_hz);
  if (len == 0) throw UsageError("sample rate too low for level frames");
  const size_t frames = speech.size() / len;
  std::vector<double> rms_db(frames);
  double peak = -std::numeric_limits<double>::infinity();
  for (size_t f = 0; f < frames; ++f) {
    const double p = power_over(speech, f * len, (f + 1) * len) / static_cast<double>(len);
    rms_db[f] = p > 0.0 ? 10.0 * std::log10(p) : -std::numeric_limits<double>::infinity();
    peak = std::max(peak, rms_db[f]);
  }
  if (!std::isfinite(peak)) throw InputError("speech is silent: cannot define a speech level");
  std::vector<bool> active(frames);
  for (size_t f = 0; f < frames; ++f) active[f] = rms_db[f] > peak - active_threshold_db;
  return active;
}

double active_speech_power(std::span<const double> speech, int sample_rate_hz,
                           double active_threshold_db) {
  const auto active = active_level_frames(speech, sample_rate_hz, active_threshold_db);
  const size_t len = level_frame_len(sample_rate_hz);
  double acc = 0.0;
  size_t n = 0;
  for (size_t f = 0; f < active.size(); ++f) {
    if (!active[f]) continue;
    acc += power_over(speech, f * len, (f + 1) * len);
    n += len;
  }
  return acc / static_cast<double>(n);
}

double measure_snr_db(std::span<const double> speech, std::span<const double> noise,
                      int sample_rate_hz, double active_threshold_db) {
  const double ps = active_speech_power(speech, sample_rate_hz, active_threshold_db);
  const double pn = power_over(noise, 0, noise.size()) / static_cast<double>(noise.size());
  return 10.0 * std::log10(ps / pn);
}

MixResult mix_at_snr(const MixSpec& spec) {
  if (!std::isfinite(spec.target_snr_db)) throw InputError("target SNR must be finite");
  if (spec.noise.size() < spec.speech.size()) {
    throw UsageError("noise is shorter than speech");
  }
  const auto active =
      active_level_frames(spec.speech, spec.sample_rate_hz, spec.active_threshold_db);
  const size_t active_samples =
      static_cast<size_t>(std::count(active.begin(), active.end(), true)) *
      level_frame_len(spec.sample_rate_hz);
  if (active_samples < static_cast<size_t>(spec.sample_rate_hz)) {
    throw InputError("speech has less than 1 s of active frames");
  }
  const double ps = active_speech_power(spec.speech, spec.sample_rate_hz, spec.active_threshold_db);
  const auto noise = spec.noise.first(spec.speech.size());
  const double pn = power_over(noise, 0, noise.size()) / static_cast<double>(noise.size());
  if (!(pn > 0.0)) throw InputError("noise is silent");

  MixResult r;
  r.noise_scale = std::sqrt(ps / (pn * std::pow(10.0, spec.target_snr_db / 10.0)));
  r.speech.assign(spec.speech.begin(), spec.speech.end());
  r.noise.resize(noise.size());
  r.mix.resize(noise.size());
  for (size_t i = 0; i < noise.size(); ++i) {
    r.noise[i] = noise[i] * r.noise_scale;
    r.mix[i] = r.speech[i] + r.noise[i];
  }
  return r;
}

SnriReport snri_by_gain_shadowing(std::span<const double> speech, std::span<const double> noise,
                                  const GainLog& gain_log, const FrameConfig& cfg,
                                  double active_threshold_db) {
  if (speech.size() != noise.size()) throw UsageError("speech and noise lengths differ");
  const std::vector<double> shadow_speech = apply_gain_log(speech, gain_log, cfg);
  const std::vector<double> shadow_noise = apply_gain_log(noise, gain_log, cfg);

  const auto delay = static_cast<size_t>(algorithmic_latency_samples(cfg));
  if (speech.size() <= delay) throw InputError("signal shorter than the algorithmic latency");
  const size_t usable = speech.size() - delay;
  const auto in_s = speech.first(usable);
  const auto in_n = noise.first(usable);
  const auto out_s = std::span<const double>(shadow_speech).subspan(delay, usable);
  const auto out_n = std::span<const double>(shadow_noise).subspan(delay, usable);

  const auto active = active_level_frames(in_s, cfg.sample_rate_hz, active_threshold_db);
  const size_t len = level_frame_len(cfg.sample_rate_hz);
  double ps_in = 0, pn_in = 0, ps_out = 0, pn_out = 0;
  std::vector<SampleRange> noise_only;
  for (size_t f = 0; f < active.size(); ++f) {
    const size_t b = f * len;
    const size_t e = b + len;
    if (active[f]) {
      ps_in += power_over(in_s, b, e);
      pn_in += power_over(in_n, b, e);
      ps_out += power_over(out_s, b, e);
      pn_out += power_over(out_n, b, e);
    } else if (f > 0 && f + 1 < active.size() && !active[f - 1] && !active[f + 1]) {
      noise_only.emplace_back(b, e);
    }
  }

  SnriReport r;
  r.input_snr_db = ratio_db(ps_in, pn_in);
  r.output_snr_db = ratio_db(ps_out, pn_out);
  r.snri_db = r.output_snr_db - r.input_snr_db;
  if (noise_only.empty()) {
    r.noise_reduction_db = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::vector<double> in_mix(usable), out_mix(usable);
    for (size_t i = 0; i < usable; ++i) {
      in_mix[i] = in_s[i] + in_n[i];
      out_mix[i] = out_s[i] + out_n[i];
    }
    r.noise_reduction_db = noise_segment_reduction(in_mix, out_mix, noise_only);
  }
  return r;
}

double noise_segment_reduction(std::span<const double> input, std::span<const double> output,
                               std::span<const SampleRange> ranges) {
  size_t covered = 0;
  double pin = 0.0, pout = 0.0;
  for (const auto& [b, e] : ranges) {
    if (b > e || e > input.size() || e > output.size()) {
      throw UsageError("noise_segment_reduction: range outside the signals");
    }
    covered += e - b;
    pin += power_over(input, b, e);
    pout += power_over(output, b, e);
  }
  if (covered == 0) throw InputError("noise_segment_reduction: no noise-only samples");
  return ratio_db(pin, pout);
}

double relative_improvement(double before, double after) {
  if (!(before > 0.0)) throw InputError("relative_improvement: 'before' score must be positive");
  return 100.0 * (after - before) / before;
}

std::vector<std::vector<double>> spectrogram_db(std::span<const double> signal,
                                                const FrameConfig& cfg) {
  Framer framer(cfg);
  std::vector<std::vector<double>> rows;
  const auto frame = static_cast<size_t>(cfg.frame_len);
  const auto hop = static_cast<size_t>(cfg.hop_len);
  SpectralFrame spec(cfg.num_bins());
  for (size_t start = 0; start + frame <= signal.size(); start += hop) {
    framer.analyze(signal.subspan(start, frame), spec);
    std::vector<double> row(spec.size());
    for (size_t i = 0; i < spec.size(); ++i) {
      row[i] = 10.0 * std::log10(std::max(spec.power[i], 1e-24));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string spectrogram_csv(const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed;
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) os << ',';
      os << row[i];
    }
    os << '\n';
  }
  return os.str();
}

std::string evaluation_csv_header() {
  return "noise_type,target_snr_db,preset,snri_db,noise_reduction_db,input_snr_db,output_snr_db,"
         "variant,speech\n";
}

std::string evaluation_csv_row(const EvaluationRow& row) {
  std::ostringstream os;
  os << row.noise_type << ',' << fmt(row.target_snr_db) << ',' << row.preset << ','
     << fmt(row.report.snri_db) << ',' << fmt(row.report.noise_reduction_db) << ','
     << fmt(row.report.input_snr_db) << ',' << fmt(row.report.output_snr_db) << ','
     << row.variant << ',' << row.speech << '\n';
  return os.str();
}

}  // namespace dsse
