#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "dsse/config.h"
#include "dsse/errors.h"
#include "dsse/metrics.h"
#include "dsse/pipeline.h"
#include "support/signals.h"

using namespace dsse;

namespace {

PipelineConfig bypass_config() {
  PipelineConfig cfg = load_preset("communication");
  cfg.frame.hpf_cutoff_hz.reset();
  cfg.stage1.gains.mu.assign(33, 0.0);
  cfg.stage2.gains.mu.assign(33, 0.0);
  return cfg;
}

double power(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p;
}

}  // namespace

TEST_CASE("bypass: mu = 0 in both stages reproduces the delayed input") {
  const PipelineConfig cfg = bypass_config();
  const auto x = testing::white_noise(16000 * 2, 21, 0.2);
  for (auto run : {&process_stream, &single_stage_process}) {
    const auto y = run(x, cfg, true).output;
    REQUIRE(y.size() == x.size());
    const size_t d = 192;
    double err = 0.0, ref = 0.0;
    for (size_t i = 0; i + d < x.size(); ++i) {
      err += (y[i + d] - x[i]) * (y[i + d] - x[i]);
      ref += x[i] * x[i];
    }
    CHECK(std::sqrt(err / ref) < 1e-6);
    for (size_t i = 0; i < d; ++i) CHECK(std::abs(y[i]) < 1e-12);
  }
}

TEST_CASE("empty and silent streams") {
  const PipelineConfig cfg = load_preset("communication");
  const auto empty = process_stream(std::vector<double>{}, cfg);
  CHECK(empty.output.empty());
  CHECK(empty.gains.num_frames() == 0);

  const std::vector<double> zeros(16000, 0.0);
  const auto out = process_stream(zeros, cfg);
  REQUIRE(out.output.size() == zeros.size());
  for (double v : out.output) CHECK(v == 0.0);
}

TEST_CASE("output length and gain log frame count") {
  const PipelineConfig cfg = load_preset("communication");
  for (size_t n : {size_t{1}, size_t{63}, size_t{64}, size_t{65}, size_t{1000}, size_t{16000}}) {
    const auto x = testing::white_noise(n, n);
    const auto r = process_stream(x, cfg);
    CHECK(r.output.size() == n);
    CHECK(r.gains.num_frames() == stream_frame_count(cfg.frame, n));
    CHECK(r.gains.num_frames() * 64 >= n);
  }
}

TEST_CASE("chunked processing equals one-shot processing bit-exactly") {
  const PipelineConfig cfg = load_preset("communication");
  const auto x = testing::pink_noise(16000 * 3, 5);
  const auto whole = process_stream(x, cfg).output;

  std::mt19937 rng(3);
  std::uniform_int_distribution<size_t> chunk(1, 700);
  Suppressor sup(cfg);
  std::vector<double> out;
  for (size_t pos = 0; pos < x.size();) {
    const size_t len = std::min(chunk(rng), x.size() - pos);
    sup.process(std::span(x).subspan(pos, len), out);
    pos += len;
  }
  const std::vector<double> zeros(64, 0.0);
  while (out.size() < x.size()) sup.process(zeros, out);
  out.resize(x.size());
  CHECK(out == whole);
}

TEST_CASE("determinism") {
  const PipelineConfig cfg = load_preset("communication");
  const auto x = testing::white_noise(16000, 8);
  const auto a = process_stream(x, cfg);
  const auto b = process_stream(x, cfg);
  CHECK(a.output == b.output);
  CHECK(single_stage_process(x, cfg).output == single_stage_process(x, cfg).output);

  // Same frame, same starting state: identical result.
  Suppressor s1(cfg);
  std::vector<double> sink;
  s1.process(std::span(x).first(4000), sink);
  Suppressor s2 = s1;
  const std::vector<double> frame(x.begin() + 4000, x.begin() + 4128);
  const std::vector<double> o1(s1.process_frame(frame).output.begin(), s1.process_frame(frame).output.end());
  const std::vector<double> o2(s2.process_frame(frame).output.begin(), s2.process_frame(frame).output.end());
  CHECK(o1 == o2);
}

TEST_CASE("one forward and one inverse transform per frame") {
  const PipelineConfig cfg = load_preset("communication");
  const auto x = testing::white_noise(12345, 2);
  for (auto mode : {StageMode::kDual, StageMode::kSingle}) {
    Suppressor sup(cfg, mode);
    std::vector<double> out;
    sup.process(x, out);
    CHECK(sup.frames_processed() > 0);
    CHECK(sup.forward_transforms() == sup.frames_processed());
    CHECK(sup.inverse_transforms() == sup.frames_processed());
  }
}

TEST_CASE("process_frame rejects a wrong frame length") {
  Suppressor sup(load_preset("communication"));
  CHECK_THROWS_AS(sup.process_frame(std::vector<double>(100, 0.0)), UsageError);
}

TEST_CASE("single-stage mode leaves Stage-2 untouched") {
  const PipelineConfig cfg = load_preset("communication");
  Suppressor sup(cfg, StageMode::kSingle);
  std::vector<double> out;
  sup.process(testing::white_noise(16000, 4), out);
  for (double g : sup.last_band_gains(2)) CHECK(g == 1.0);
  bool suppressed = false;
  for (double g : sup.last_band_gains(1)) suppressed |= g < 1.0;
  CHECK(suppressed);
}

TEST_CASE("stationary white noise is reduced by at least 10 dB after warm-up") {
  const PipelineConfig cfg = load_preset("communication");
  const auto x = testing::white_noise(16000 * 8, 31, 0.05);
  const auto y = process_stream(x, cfg).output;
  const size_t d = 192;
  const size_t begin = 16000 * 5;
  const double pin = power(std::span(x).subspan(begin, x.size() - begin - d));
  const double pout = power(std::span(y).subspan(begin + d, x.size() - begin - d));
  CHECK(10.0 * std::log10(pin / pout) >= 10.0);
}

TEST_CASE("logged gains are lower in noise-only segments than during speech") {
  const PipelineConfig cfg = load_preset("communication");
  const auto speech = testing::synthetic_speech(12.0, 16000, 17);
  const auto noise = testing::white_noise(speech.samples.size(), 18);
  const auto mix = mix_at_snr({speech.samples, noise, 16000, 6.0, 35.0});
  const auto r = process_stream(mix.mix, cfg);
  const auto active = active_level_frames(mix.speech, 16000, 35.0);
  const size_t level_len = level_frame_len(16000);

  double g_active = 0.0, g_noise = 0.0;
  size_t n_active = 0, n_noise = 0;
  for (size_t f = 0; f < r.gains.num_frames(); ++f) {
    // Input sample at the centre of the frame that produced log entry f.
    const long centre = 64L * static_cast<long>(f) - 192 + 64;
    if (centre < 0) continue;
    const size_t lf = static_cast<size_t>(centre) / level_len;
    if (lf >= active.size()) break;
    double mean = 0.0;
    for (double g : r.gains.frame(f)) mean += g;
    mean /= static_cast<double>(r.gains.num_bins());
    if (active[lf]) {
      g_active += mean;
      ++n_active;
    } else {
      g_noise += mean;
      ++n_noise;
    }
  }
  REQUIRE(n_active > 0);
  REQUIRE(n_noise > 0);
  CHECK(g_noise / n_noise < g_active / n_active);
}

TEST_CASE("Stage-2 alpha rises as the Stage-1 SNR falls") {
  const PipelineConfig cfg = load_preset("communication");
  Suppressor sup(cfg);
  auto prev = sup.stage2_alpha(40.0);
  for (double snr = 39.0; snr >= -20.0; snr -= 1.0) {
    const auto a = sup.stage2_alpha(snr);
    for (size_t k = 0; k < a.size(); ++k) CHECK(a[k] >= prev[k]);
    prev = a;
  }
  PipelineConfig no_feed = cfg;
  no_feed.stage2.uses_snr_feed = false;
  Suppressor fixed(no_feed);
  CHECK(fixed.stage2_alpha(-20.0) == no_feed.stage2.tracker.alpha);
}

TEST_CASE("summarize_snr") {
  const BandPlan plan = build_band_plan(256, 16000, 2);  // widths 23 and 106
  // Energy weights 1*23 and 1*106.
  const auto s = summarize_snr(std::vector<double>{1.0, 1.0}, std::vector<double>{10.0, 100.0}, plan);
  CHECK(s.snr_db == doctest::Approx((23.0 * 10.0 + 106.0 * 20.0) / 129.0));
  // Zero energy falls back to the plain mean; zero SNR floors at -100 dB.
  const auto z = summarize_snr(std::vector<double>{0.0, 0.0}, std::vector<double>{0.0, 100.0}, plan);
  CHECK(z.snr_db == doctest::Approx((-100.0 + 20.0) / 2.0));
}

TEST_CASE("Stage-2 sees a higher SNR than Stage-1 on a separable mixture") {
  // Gated low-frequency tones (speech stand-in) plus white noise. Stage-1
  // attenuates noise-dominated bands, so the residual SNR rises.
  const PipelineConfig cfg = load_preset("communication");
  const size_t n = 16000 * 4;
  std::vector<double> tones(n);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 16000.0;
    const bool on = (i / 4000) % 2 == 0;
    tones[i] = on ? 0.3 * std::sin(2.0 * std::numbers::pi * 312.5 * t) +
                        0.2 * std::sin(2.0 * std::numbers::pi * 750.0 * t)
                  : 0.0;
  }
  const auto noise = testing::white_noise(n, 44, 0.05);
  std::vector<double> mix(n);
  for (size_t i = 0; i < n; ++i) mix[i] = tones[i] + noise[i];

  Suppressor sup(cfg, StageMode::kSingle);
  Framer framer(cfg.frame);
  const BandPlan& plan = sup.band_plan();
  double s1 = 0.0, n1 = 0.0, s2 = 0.0, n2 = 0.0;
  for (size_t start = 0; start + 128 <= n; start += 64) {
    const std::span<const double> mf(mix.data() + start, 128);
    sup.process_frame(mf);
    if (start < 16000) continue;
    const auto g = expand_to_bins(sup.last_band_gains(1), plan);
    const auto ss = framer.analyze(std::span<const double>(tones.data() + start, 128));
    const auto ns = framer.analyze(std::span<const double>(noise.data() + start, 128));
    for (size_t i = 0; i < g.size(); ++i) {
      s1 += ss.power[i];
      n1 += ns.power[i];
      s2 += ss.power[i] * g[i] * g[i];
      n2 += ns.power[i] * g[i] * g[i];
    }
  }
  CHECK(s2 / n2 >= s1 / n1);
}

TEST_CASE("apply_gain_log replays the processing path") {
  const PipelineConfig cfg = load_preset("communication");
  const auto x = testing::pink_noise(16000 * 2, 12);
  const auto r = process_stream(x, cfg);
  const auto replay = apply_gain_log(x, r.gains, cfg.frame);
  REQUIRE(replay.size() == r.output.size());
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(replay[i] - r.output[i]) < 1e-12);

  CHECK_THROWS_AS(apply_gain_log(std::vector<double>(x.begin(), x.begin() + 1000), r.gains, cfg.frame),
                  UsageError);
}
