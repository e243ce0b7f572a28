#include "cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dsse/bands.h"
#include "dsse/config.h"
#include "dsse/errors.h"
#include "dsse/metrics.h"
#include "dsse/pipeline.h"
#include "dsse/wav.h"

namespace dsse::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigOptions {
  std::optional<std::string> preset;
  std::optional<fs::path> config_file;
  std::vector<std::string> overrides;
  bool print_config = false;

  void add_to(CLI::App& app) {
    app.add_option("--preset", preset, "Preset name (default: communication)");
    app.add_option("--config", config_file, "JSON config file layered over the preset");
    app.add_option("--set", overrides, "Override one parameter, e.g. stage2.gain.mu=1.2")
        ->take_all();
    app.add_flag("--print-config", print_config, "Print the effective config and exit");
  }

  PipelineConfig resolve() const { return resolve_config(preset, config_file, overrides); }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<double> read_mono(const fs::path& path, int expected_rate_hz, const char* role) {
  WavData wav = read_wav(path);
  if (wav.channels != 1) {
    throw UsageError(path.string() + ": expected mono " + role + ", got " +
                     std::to_string(wav.channels) + " channels");
  }
  if (expected_rate_hz > 0 && wav.sample_rate_hz != expected_rate_hz) {
    throw UsageError(path.string() + ": sample rate " + std::to_string(wav.sample_rate_hz) +
                     " Hz does not match the configured " + std::to_string(expected_rate_hz) +
                     " Hz");
  }
  return std::move(wav.samples);
}

// ---------------------------------------------------------------------------
// enhance

struct EnhanceOptions {
  ConfigOptions config;
  fs::path input;
  fs::path output;
  bool no_latency_compensation = false;
  bool single_stage = false;
  std::optional<fs::path> spectrogram_in;
  std::optional<fs::path> spectrogram_out;
  std::optional<fs::path> tracker_debug;
};

int cmd_enhance(const EnhanceOptions& opt, std::ostream& out) {
  const PipelineConfig cfg = opt.config.resolve();
  if (opt.config.print_config) {
    out << to_json(cfg).dump(2) << '\n';
    return kExitOk;
  }
  if (opt.input.empty() || opt.output.empty()) {
    throw UsageError("enhance needs an input and an output path");
  }

  WavData wav = read_wav(opt.input);
  if (wav.channels != 1) {
    throw UsageError(opt.input.string() + ": expected mono input, got " +
                     std::to_string(wav.channels) + " channels");
  }
  if (wav.sample_rate_hz != cfg.frame.sample_rate_hz) {
    throw UsageError(opt.input.string() + ": sample rate " + std::to_string(wav.sample_rate_hz) +
                     " Hz does not match the configured " +
                     std::to_string(cfg.frame.sample_rate_hz) + " Hz");
  }

  const size_t n = wav.samples.size();
  const auto delay =
      opt.no_latency_compensation ? size_t{0} : static_cast<size_t>(algorithmic_latency_samples(cfg.frame));
  Suppressor sup(cfg, opt.single_stage ? StageMode::kSingle : StageMode::kDual);

  std::ostringstream debug;
  if (opt.tracker_debug) debug << "frame,stage,band,raw_noise,smoothed_noise\n";
  const int stages = opt.single_stage ? 1 : 2;
  auto dump_tracker = [&] {
    if (!opt.tracker_debug) return;
    const auto frame = sup.frames_processed() - 1;
    for (int s = 1; s <= stages; ++s) {
      const auto raw = sup.last_raw_noise(s);
      const auto smooth = sup.last_noise_estimate(s);
      for (size_t k = 0; k < raw.size(); ++k) {
        debug << frame << ',' << s << ',' << k << ',' << raw[k] << ',' << smooth[k] << '\n';
      }
    }
  };

  std::vector<double> processed;
  processed.reserve(n + delay + static_cast<size_t>(2 * cfg.frame.frame_len));
  const auto hop = static_cast<size_t>(cfg.frame.hop_len);
  const auto t0 = std::chrono::steady_clock::now();
  for (size_t pos = 0; pos < n; pos += hop) {
    const size_t len = std::min(hop, n - pos);
    sup.process(std::span<const double>(wav.samples).subspan(pos, len), processed);
    if (opt.tracker_debug) dump_tracker();
  }
  const std::vector<double> zeros(hop, 0.0);
  while (n > 0 && processed.size() < n + delay) {
    sup.process(zeros, processed);
    if (opt.tracker_debug) dump_tracker();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  WavData result = wav;
  result.samples.assign(processed.begin() + static_cast<std::ptrdiff_t>(std::min(delay, processed.size())),
                        processed.begin() + static_cast<std::ptrdiff_t>(std::min(delay + n, processed.size())));
  write_wav(opt.output, result);

  if (opt.spectrogram_in) {
    write_text(*opt.spectrogram_in, spectrogram_csv(spectrogram_db(wav.samples, cfg.frame)));
  }
  if (opt.spectrogram_out) {
    write_text(*opt.spectrogram_out, spectrogram_csv(spectrogram_db(result.samples, cfg.frame)));
  }
  if (opt.tracker_debug) write_text(*opt.tracker_debug, debug.str());

  const double duration = static_cast<double>(n) / cfg.frame.sample_rate_hz;
  out << "frames=" << sup.frames_processed() << " realtime_factor=" << std::fixed
      << std::setprecision(4) << (duration > 0.0 ? seconds / duration : 0.0)
      << " latency_ms=" << std::setprecision(3) << algorithmic_latency_ms(cfg.frame) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mix

struct MixOptions {
  fs::path speech;
  fs::path noise;
  fs::path output;
  double snr_db = 0.0;
  bool loop_noise = false;
  double active_threshold_db = kDefaultActiveThresholdDb;
  std::string format = "float32";
};

std::vector<double> fit_noise(std::vector<double> noise, size_t length, bool loop,
                              const fs::path& path) {
  if (noise.size() >= length) return noise;
  if (!loop) {
    throw UsageError(path.string() + ": noise is shorter than the speech (use --loop-noise)");
  }
  if (noise.empty()) throw InputError(path.string() + ": noise file is empty");
  std::vector<double> looped(length);
  for (size_t i = 0; i < length; ++i) looped[i] = noise[i % noise.size()];
  return looped;
}

fs::path sidecar_path(const fs::path& output, const char* suffix) {
  fs::path p = output;
  p.replace_filename(output.stem().string() + suffix + output.extension().string());
  return p;
}

int cmd_mix(const MixOptions& opt, std::ostream& out) {
  const WavData speech_wav = read_wav(opt.speech);
  if (speech_wav.channels != 1) {
    throw UsageError(opt.speech.string() + ": expected mono speech, got " +
                     std::to_string(speech_wav.channels) + " channels");
  }
  const int rate = speech_wav.sample_rate_hz;
  const auto noise = fit_noise(read_mono(opt.noise, rate, "noise"), speech_wav.samples.size(),
                               opt.loop_noise, opt.noise);
  const MixResult mix =
      mix_at_snr({speech_wav.samples, noise, rate, opt.snr_db, opt.active_threshold_db});

  WavData w;
  w.sample_rate_hz = rate;
  w.format = opt.format == "pcm16" ? SampleFormat::kPcm16 : SampleFormat::kFloat32;
  w.samples = mix.mix;
  write_wav(opt.output, w);
  w.samples = mix.speech;
  write_wav(sidecar_path(opt.output, ".speech"), w);
  w.samples = mix.noise;
  write_wav(sidecar_path(opt.output, ".noise"), w);
  out << "noise_scale=" << std::setprecision(6) << mix.noise_scale << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct NoiseEntry {
  std::string name;
  fs::path path;
};

struct Matrix {
  std::vector<fs::path> speech;
  std::vector<NoiseEntry> noises;
  std::vector<double> snrs_db;
  std::vector<std::string> presets;
  std::vector<std::string> variants;
  std::vector<std::string> overrides;
  bool loop_noise = false;
  double active_threshold_db = kDefaultActiveThresholdDb;
};

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  return doc.contains(key) ? doc.at(key).get<T>() : fallback;
}

// Schema:
// {"speech": [path...], "noises": [path | {"name", "path"}...], "snrs_db": [...],
//  "presets": [...], "variants": ["dual", "single"], "overrides": ["k=v"...],
//  "loop_noise": bool, "active_threshold_db": number}
// Relative paths resolve against the matrix file's directory.
Matrix load_matrix(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open matrix " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": invalid JSON: " + e.what());
  }
  static const std::vector<std::string> known = {"speech",   "noises",     "snrs_db",
                                                 "presets",  "variants",   "overrides",
                                                 "loop_noise", "active_threshold_db"};
  if (!doc.is_object()) throw UsageError(path.string() + ": matrix must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError(path.string() + ": unknown matrix key '" + key + "'");
    }
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  Matrix m;
  try {
    for (const auto& s : get_or(doc, "speech", json::array())) m.speech.push_back(resolve(s.get<std::string>()));
    for (const auto& n : get_or(doc, "noises", json::array())) {
      if (n.is_string()) {
        const fs::path p = resolve(n.get<std::string>());
        m.noises.push_back({p.stem().string(), p});
      } else {
        m.noises.push_back({n.at("name").get<std::string>(), resolve(n.at("path").get<std::string>())});
      }
    }
    m.snrs_db = get_or(doc, "snrs_db", std::vector<double>{});
    m.presets = get_or(doc, "presets", std::vector<std::string>{"communication"});
    m.variants = get_or(doc, "variants", std::vector<std::string>{"dual"});
    m.overrides = get_or(doc, "overrides", std::vector<std::string>{});
    m.loop_noise = get_or(doc, "loop_noise", false);
    m.active_threshold_db = get_or(doc, "active_threshold_db", kDefaultActiveThresholdDb);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": malformed matrix: " + e.what());
  }
  for (const auto& v : m.variants) {
    if (v != "dual" && v != "single") {
      throw UsageError(path.string() + ": variant must be 'dual' or 'single', got '" + v + "'");
    }
  }
  for (const double snr : m.snrs_db) {
    if (!std::isfinite(snr)) throw UsageError(path.string() + ": SNRs must be finite");
  }
  return m;
}

struct Cell {
  size_t speech;
  size_t noise;
  double snr_db;
  std::string preset;
  std::string variant;
};

int cmd_evaluate(const fs::path& matrix_path, const fs::path& out_csv, int threads,
                 std::ostream& out) {
  const Matrix m = load_matrix(matrix_path);

  // Validate configs and every file before any processing.
  std::map<std::string, PipelineConfig> configs;
  for (const auto& p : m.presets) configs.emplace(p, resolve_config(p, std::nullopt, m.overrides));
  for (const auto& s : m.speech) {
    if (!fs::is_regular_file(s)) throw IoError("missing speech file " + s.string());
  }
  for (const auto& n : m.noises) {
    if (!fs::is_regular_file(n.path)) throw IoError("missing noise file " + n.path.string());
  }

  std::vector<Cell> cells;
  for (size_t s = 0; s < m.speech.size(); ++s) {
    for (size_t n = 0; n < m.noises.size(); ++n) {
      for (const double snr : m.snrs_db) {
        for (const auto& p : m.presets) {
          for (const auto& v : m.variants) cells.push_back({s, n, snr, p, v});
        }
      }
    }
  }

  std::vector<std::vector<double>> speech;
  std::vector<std::vector<double>> noises;
  if (!cells.empty()) {
    const int rate = configs.begin()->second.frame.sample_rate_hz;
    for (const auto& [name, cfg] : configs) {
      if (cfg.frame.sample_rate_hz != rate) {
        throw UsageError("presets in one matrix must share a sample rate");
      }
    }
    for (const auto& s : m.speech) speech.push_back(read_mono(s, rate, "speech"));
    for (const auto& n : m.noises) noises.push_back(read_mono(n.path, rate, "noise"));
  }

  std::vector<EvaluationRow> rows(cells.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      try {
        const Cell& c = cells[i];
        const PipelineConfig& cfg = configs.at(c.preset);
        const auto& sp = speech[c.speech];
        const auto noise =
            fit_noise(noises[c.noise], sp.size(), m.loop_noise, m.noises[c.noise].path);
        const MixResult mix =
            mix_at_snr({sp, noise, cfg.frame.sample_rate_hz, c.snr_db, m.active_threshold_db});
        const StreamResult res = c.variant == "single" ? single_stage_process(mix.mix, cfg)
                                                       : process_stream(mix.mix, cfg);
        rows[i] = EvaluationRow{m.noises[c.noise].name,
                                c.snr_db,
                                c.preset,
                                snri_by_gain_shadowing(mix.speech, mix.noise, res.gains, cfg.frame,
                                                       m.active_threshold_db),
                                c.variant,
                                m.speech[c.speech].stem().string()};
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t pool = std::min<size_t>(cells.size(), threads > 0 ? static_cast<size_t>(threads) : hw);
  std::vector<std::thread> workers;
  for (size_t t = 0; t < pool; ++t) workers.emplace_back(worker);
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);

  std::sort(rows.begin(), rows.end(), [](const EvaluationRow& a, const EvaluationRow& b) {
    return std::tie(a.noise_type, a.target_snr_db, a.preset, a.variant, a.speech) <
           std::tie(b.noise_type, b.target_snr_db, b.preset, b.variant, b.speech);
  });
  std::string csv = evaluation_csv_header();
  for (const auto& r : rows) csv += evaluation_csv_row(r);
  write_text(out_csv, csv);
  out << "rows=" << rows.size() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-stage band-domain noise suppressor"};
  app.name(args.empty() ? "dsse" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  EnhanceOptions enhance;
  auto* enh = app.add_subcommand("enhance", "Suppress noise in a mono WAV file");
  enh->add_option("input", enhance.input, "Input WAV (mono, PCM16 or float32)");
  enh->add_option("output", enhance.output, "Output WAV (same format and length)");
  enhance.config.add_to(*enh);
  enh->add_flag("--no-latency-compensation", enhance.no_latency_compensation,
                "Keep the algorithmic delay in the output");
  enh->add_flag("--single-stage", enhance.single_stage, "Disable Stage-2");
  enh->add_option("--spectrogram-in", enhance.spectrogram_in, "Write the input spectrogram CSV");
  enh->add_option("--spectrogram-out", enhance.spectrogram_out, "Write the output spectrogram CSV");
  enh->add_option("--tracker-debug", enhance.tracker_debug,
                  "Write per-frame noise estimates (frame,stage,band,raw,smoothed)");

  MixOptions mix;
  auto* mx = app.add_subcommand("mix", "Mix speech and noise at a target SNR");
  mx->add_option("speech", mix.speech, "Clean speech WAV")->required();
  mx->add_option("noise", mix.noise, "Noise WAV")->required();
  mx->add_option("output", mix.output, "Mix WAV; .speech/.noise sidecars are written next to it")
      ->required();
  mx->add_option("--snr", mix.snr_db, "Target SNR in dB")->required();
  mx->add_flag("--loop-noise", mix.loop_noise, "Repeat a short noise file to cover the speech");
  mx->add_option("--active-threshold", mix.active_threshold_db,
                 "Speech-activity threshold in dB below the loudest frame")
      ->capture_default_str();
  mx->add_option("--format", mix.format, "Output encoding")
      ->check(CLI::IsMember({"float32", "pcm16"}))
      ->capture_default_str();

  fs::path matrix_path;
  fs::path eval_out;
  int threads = 0;
  auto* ev = app.add_subcommand("evaluate", "Run an evaluation matrix and write a metrics CSV");
  ev->add_option("matrix", matrix_path, "Matrix JSON")->required();
  ev->add_option("output", eval_out, "Output CSV")->required();
  ev->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")
      ->capture_default_str();

  ConfigOptions plan_cfg;
  std::optional<fs::path> plan_out;
  auto* bp = app.add_subcommand("bandplan", "Print the band plan CSV");
  plan_cfg.add_to(*bp);
  bp->add_option("--out", plan_out, "Write to a file instead of stdout");

  std::string presets_action = "list";
  std::string preset_name;
  auto* ps = app.add_subcommand("presets", "List presets or show one as JSON");
  ps->add_option("action", presets_action, "list | show")
      ->check(CLI::IsMember({"list", "show"}))
      ->capture_default_str();
  ps->add_option("name", preset_name, "Preset to show");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (enh->parsed()) return cmd_enhance(enhance, out);
  if (mx->parsed()) return cmd_mix(mix, out);
  if (ev->parsed()) return cmd_evaluate(matrix_path, eval_out, threads, out);
  if (bp->parsed()) {
    const PipelineConfig cfg = plan_cfg.resolve();
    if (plan_cfg.print_config) {
      out << to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
    const std::string csv =
        band_plan_csv(build_band_plan(cfg.frame.fft_len, cfg.frame.sample_rate_hz, cfg.num_bands));
    if (plan_out) {
      write_text(*plan_out, csv);
    } else {
      out << csv;
    }
    return kExitOk;
  }
  if (ps->parsed()) {
    if (presets_action == "show") {
      if (preset_name.empty()) throw UsageError("presets show needs a preset name");
      out << preset_json(preset_name).dump(2) << '\n';
    } else {
      for (const auto& name : preset_names()) out << name << '\n';
    }
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace dsse::cli
