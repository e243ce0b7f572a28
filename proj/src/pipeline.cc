#include "dsse/pipeline.h"

#include <algorithm>
#include <cmath>

#include "dsse/errors.h"
#include "dsse/gain.h"
#include "dsse/noise_tracking.h"

namespace dsse {

FrameSnrSummary summarize_snr(std::span<const double> band_mags, std::span<const double> snr,
                              const BandPlan& plan) {
  double weighted = 0.0;
  double total = 0.0;
  double plain = 0.0;
  for (size_t k = 0; k < snr.size(); ++k) {
    const double db = std::max(10.0 * std::log10(std::max(snr[k], 0.0)), kSnrFloorDb);
    const double energy = band_mags[k] * band_mags[k] * plan.width(static_cast<int>(k));
    weighted += energy * db;
    total += energy;
    plain += db;
  }
  if (total > 0.0 && std::isfinite(total)) return {weighted / total};
  return {snr.empty() ? kSnrFloorDb : plain / static_cast<double>(snr.size())};
}

void GainLog::append(std::span<const double> bin_gains) {
  if (bin_gains.size() != static_cast<size_t>(num_bins_)) {
    throw UsageError("GainLog::append: wrong number of bins");
  }
  data_.insert(data_.end(), bin_gains.begin(), bin_gains.end());
}

size_t stream_frame_count(const FrameConfig& cfg, size_t num_samples) {
  if (num_samples == 0) return 0;
  const auto hop = static_cast<size_t>(cfg.hop_len);
  const auto frame = static_cast<size_t>(cfg.frame_len);
  const auto primed = static_cast<size_t>(algorithmic_latency_samples(cfg));
  // Frames available once all input is buffered; each emits one hop.
  size_t frames = (primed + num_samples - frame) / hop + 1;
  // Flush with zeros until the output covers the input.
  while (frames * hop < num_samples) ++frames;
  return frames;
}

GainLog GainLog::constant(const FrameConfig& cfg, size_t num_samples, double gain) {
  GainLog log(cfg.num_bins());
  const std::vector<double> g(static_cast<size_t>(cfg.num_bins()), gain);
  const size_t n = stream_frame_count(cfg, num_samples);
  log.reserve_frames(n);
  for (size_t i = 0; i < n; ++i) log.append(g);
  return log;
}

// ---------------------------------------------------------------------------

Suppressor::Suppressor(const PipelineConfig& cfg, StageMode mode)
    : cfg_((cfg.validate(), cfg)),
      mode_(mode),
      plan_(build_band_plan(cfg.frame.fft_len, cfg.frame.sample_rate_hz, cfg.num_bands)),
      framer_(cfg.frame),
      input_(cfg.frame),
      ola_(framer_.make_ola_state()),
      hpf_enabled_(cfg.frame.hpf_cutoff_hz.has_value()) {
  if (hpf_enabled_) hpf_ = design_hpf(*cfg.frame.hpf_cutoff_hz, cfg.frame.sample_rate_hz);
  for (auto [stage, sc] : {std::pair{&stage1_, &cfg.stage1}, std::pair{&stage2_, &cfg.stage2}}) {
    stage->cfg = *sc;
    stage->noise = make_noise_state(sc->tracker, cfg.num_bands);
    stage->gain = make_gain_state(cfg.num_bands);
    stage->band_gains.assign(static_cast<size_t>(cfg.num_bands), 1.0);
    stage->noise_estimate.assign(static_cast<size_t>(cfg.num_bands), 0.0);
    stage->raw_noise.assign(static_cast<size_t>(cfg.num_bands), 0.0);
  }
  const auto bins = static_cast<size_t>(cfg.frame.num_bins());
  spec_ = SpectralFrame(cfg.frame.num_bins());
  power_scratch_.assign(bins, 0.0);
  mags_.assign(static_cast<size_t>(cfg.num_bands), 0.0);
  stage_bin_gains_.assign(bins, 1.0);
  total_bin_gains_.assign(bins, 1.0);
  hop_out_.assign(static_cast<size_t>(cfg.frame.hop_len), 0.0);
  const int primed = algorithmic_latency_samples(cfg.frame);
  padding_frames_ = (primed + cfg.frame.hop_len - 1) / cfg.frame.hop_len;
}

BandVector Suppressor::run_stage(Stage& stage, std::span<const double> band_mags,
                                 std::span<const double> alpha) {
  const auto& tp = stage.cfg.tracker;
  const auto& gp = stage.cfg.gains;
  const BandVector searched = smooth_band_power(band_mags, tp, stage.noise);
  stage.raw_noise = track_raw(searched, tp, stage.noise);
  stage.noise_estimate = smooth_noise(stage.raw_noise, stage.noise, alpha);
  BandVector snr = compute_snr(band_mags, stage.noise_estimate, gp.noise_floor_eps);
  const BandVector raw_gain = compute_raw_gain(snr, gp.mu, gp.lambda);
  stage.band_gains = smooth_gain(raw_gain, stage.gain, gp);
  return snr;
}

BandVector Suppressor::stage2_alpha(double stage1_snr_db) const {
  const auto& tp = stage2_.cfg.tracker;
  if (!stage2_.cfg.uses_snr_feed) return tp.alpha;
  return effective_alpha(tp.alpha, stage1_snr_db, tp.alpha_snr_map);
}

FrameResult Suppressor::process_frame(std::span<const double> frame) {
  framer_.analyze(frame, spec_);
  return suppress_and_synthesize();
}

FrameResult Suppressor::pass_frame(std::span<const double> frame) {
  framer_.analyze(frame, spec_);
  std::fill(total_bin_gains_.begin(), total_bin_gains_.end(), 1.0);
  if (gain_log_ != nullptr) gain_log_->append(total_bin_gains_);
  framer_.synthesize(spec_, ola_, hop_out_);
  ++frames_;
  return FrameResult{hop_out_, FrameSnrSummary{}};
}

FrameResult Suppressor::suppress_and_synthesize() {
  pool_to_bands(spec_.power, plan_, mags_);
  const BandVector snr1 = run_stage(stage1_, mags_, stage1_.cfg.tracker.alpha);
  const FrameSnrSummary summary = summarize_snr(mags_, snr1, plan_);
  expand_to_bins(stage1_.band_gains, plan_, total_bin_gains_);

  if (mode_ == StageMode::kDual) {
    // Stage-2 sees the Stage-1-filtered spectrum.
    for (size_t i = 0; i < power_scratch_.size(); ++i) {
      power_scratch_[i] = spec_.power[i] * total_bin_gains_[i] * total_bin_gains_[i];
    }
    pool_to_bands(power_scratch_, plan_, mags_);
    run_stage(stage2_, mags_, stage2_alpha(summary.snr_db));
    expand_to_bins(stage2_.band_gains, plan_, stage_bin_gains_);
    for (size_t i = 0; i < total_bin_gains_.size(); ++i) total_bin_gains_[i] *= stage_bin_gains_[i];
  }

  apply_gains_in_place(spec_, total_bin_gains_);
  if (gain_log_ != nullptr) gain_log_->append(total_bin_gains_);
  framer_.synthesize(spec_, ola_, hop_out_);
  ++frames_;
  return FrameResult{hop_out_, summary};
}

void Suppressor::process(std::span<const double> samples, std::vector<double>& out) {
  if (hpf_enabled_) {
    hpf_scratch_.resize(samples.size());
    hpf_process(samples, hpf_scratch_, hpf_, hpf_state_);
    input_.push(hpf_scratch_);
  } else {
    input_.push(samples);
  }
  while (input_.ready()) {
    // Frames touching the start-up padding would seed the minimum search
    // with (partial) digital silence.
    const bool padding = padding_frames_ > 0;
    if (padding) --padding_frames_;
    const FrameResult r = padding ? pass_frame(input_.frame()) : process_frame(input_.frame());
    out.insert(out.end(), r.output.begin(), r.output.end());
    input_.advance();
  }
}

std::span<const double> Suppressor::last_band_gains(int stage) const {
  return stage == 1 ? stage1_.band_gains : stage2_.band_gains;
}

std::span<const double> Suppressor::last_noise_estimate(int stage) const {
  return stage == 1 ? stage1_.noise_estimate : stage2_.noise_estimate;
}

std::span<const double> Suppressor::last_raw_noise(int stage) const {
  return stage == 1 ? stage1_.raw_noise : stage2_.raw_noise;
}

// ---------------------------------------------------------------------------

namespace {

StreamResult run_stream(std::span<const double> samples, const PipelineConfig& cfg, StageMode mode,
                        bool record_gains) {
  StreamResult result;
  result.gains = GainLog(cfg.frame.num_bins());
  if (samples.empty()) {
    cfg.validate();
    return result;
  }
  Suppressor sup(cfg, mode);
  if (record_gains) {
    result.gains.reserve_frames(stream_frame_count(cfg.frame, samples.size()));
    sup.set_gain_log(&result.gains);
  }
  result.output.reserve(samples.size() + static_cast<size_t>(2 * cfg.frame.frame_len));
  sup.process(samples, result.output);
  const std::vector<double> zeros(static_cast<size_t>(cfg.frame.hop_len), 0.0);
  while (result.output.size() < samples.size()) sup.process(zeros, result.output);
  result.output.resize(samples.size());
  return result;
}

}  // namespace

StreamResult process_stream(std::span<const double> samples, const PipelineConfig& cfg,
                            bool record_gains) {
  return run_stream(samples, cfg, StageMode::kDual, record_gains);
}

StreamResult single_stage_process(std::span<const double> samples, const PipelineConfig& cfg,
                                  bool record_gains) {
  return run_stream(samples, cfg, StageMode::kSingle, record_gains);
}

std::vector<double> apply_gain_log(std::span<const double> samples, const GainLog& log,
                                   const FrameConfig& cfg) {
  const size_t frames = stream_frame_count(cfg, samples.size());
  if (log.num_frames() != frames ||
      (frames > 0 && log.num_bins() != cfg.num_bins())) {
    throw UsageError("gain log has " + std::to_string(log.num_frames()) + " frames, signal needs " +
                     std::to_string(frames));
  }
  std::vector<double> out;
  if (samples.empty()) return out;

  Framer framer(cfg);
  FrameBuffer input(cfg);
  OlaState ola = framer.make_ola_state();
  // Zero flush goes through the HPF too, exactly as in Suppressor::process.
  const auto hop = static_cast<size_t>(cfg.hop_len);
  std::vector<double> filtered(samples.begin(), samples.end());
  filtered.resize(std::max(samples.size(), frames * hop), 0.0);
  if (cfg.hpf_cutoff_hz) {
    BiquadState state;
    hpf_process(filtered, filtered, design_hpf(*cfg.hpf_cutoff_hz, cfg.sample_rate_hz), state);
  }
  input.push(filtered);

  SpectralFrame spec(cfg.num_bins());
  std::vector<double> hop_out(hop);
  out.reserve(frames * hop);
  for (size_t f = 0; f < frames; ++f) {
    framer.analyze(input.frame(), spec);
    apply_gains_in_place(spec, log.frame(f));
    framer.synthesize(spec, ola, hop_out);
    out.insert(out.end(), hop_out.begin(), hop_out.end());
    input.advance();
  }
  out.resize(samples.size());
  return out;
}

}  // namespace dsse
