#include "dsse/config.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "dsse/errors.h"

namespace dsse {
namespace detail {
extern const std::pair<std::string_view, std::string_view> kBundledPresets[];
extern const int kNumBundledPresets;
}  // namespace detail

namespace {

using nlohmann::json;

std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Rejects keys outside `allowed` and missing required keys.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("configuration key '" + where + "' must be an object");
  std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown configuration key '" + join_key(where, key) + "'");
    }
  }
  for (const auto& key : known) {
    if (!obj.contains(key)) {
      throw ConfigError("missing configuration key '" + join_key(where, key) + "'");
    }
  }
}

template <typename T>
T get_as(const json& obj, const std::string& where, const char* key) {
  const json& v = obj.at(key);
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("configuration key '" + join_key(where, key) + "' has the wrong type");
  }
}

std::vector<double> get_per_band(const json& obj, const std::string& where, const char* key,
                                 int num_bands) {
  const json& v = obj.at(key);
  const auto full = join_key(where, key);
  if (v.is_number()) return std::vector<double>(static_cast<size_t>(num_bands), v.get<double>());
  if (v.is_array()) {
    if (v.size() != static_cast<size_t>(num_bands)) {
      throw ConfigError("configuration key '" + full + "' must have " + std::to_string(num_bands) +
                        " entries");
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("configuration key '" + full + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw ConfigError("configuration key '" + full + "' must be a number or an array");
}

json per_band_json(const std::vector<double>& v) {
  if (!v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) {
    return v.front();
  }
  return v;
}

json stage_to_json(const StageConfig& s) {
  json map = json::array();
  for (const auto& [snr, mult] : s.tracker.alpha_snr_map.points) map.push_back({snr, mult});
  return {
      {"uses_snr_feed", s.uses_snr_feed},
      {"tracker",
       {{"subwindow_len", s.tracker.subwindow_len},
        {"num_subwindows", s.tracker.num_subwindows},
        {"bias", s.tracker.bias},
        {"psd_smoothing", s.tracker.psd_smoothing},
        {"alpha", per_band_json(s.tracker.alpha)},
        {"alpha_snr_map", map}}},
      {"gain",
       {{"mu", per_band_json(s.gains.mu)},
        {"lambda", per_band_json(s.gains.lambda)},
        {"gamma_min", s.gains.gamma_min},
        {"gamma_max", s.gains.gamma_max},
        {"noise_floor_eps", s.gains.noise_floor_eps}}},
  };
}

StageConfig stage_from_json(const json& doc, const std::string& where, int num_bands) {
  check_keys(doc, where, {"uses_snr_feed", "tracker", "gain"});
  StageConfig s;
  s.uses_snr_feed = get_as<bool>(doc, where, "uses_snr_feed");

  const auto tw = where + ".tracker";
  const json& t = doc.at("tracker");
  check_keys(t, tw,
             {"subwindow_len", "num_subwindows", "bias", "psd_smoothing", "alpha", "alpha_snr_map"});
  s.tracker.subwindow_len = get_as<int>(t, tw, "subwindow_len");
  s.tracker.num_subwindows = get_as<int>(t, tw, "num_subwindows");
  s.tracker.bias = get_as<double>(t, tw, "bias");
  s.tracker.psd_smoothing = get_as<double>(t, tw, "psd_smoothing");
  s.tracker.alpha = get_per_band(t, tw, "alpha", num_bands);
  const json& map = t.at("alpha_snr_map");
  if (!map.is_array()) throw ConfigError("configuration key '" + tw + ".alpha_snr_map' must be an array");
  s.tracker.alpha_snr_map.points.clear();
  for (const auto& p : map) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ConfigError("configuration key '" + tw +
                        ".alpha_snr_map' must hold [snr_db, multiplier] pairs");
    }
    s.tracker.alpha_snr_map.points.emplace_back(p[0].get<double>(), p[1].get<double>());
  }

  const auto gw = where + ".gain";
  const json& g = doc.at("gain");
  check_keys(g, gw, {"mu", "lambda", "gamma_min", "gamma_max", "noise_floor_eps"});
  s.gains.mu = get_per_band(g, gw, "mu", num_bands);
  s.gains.lambda = get_per_band(g, gw, "lambda", num_bands);
  s.gains.gamma_min = get_as<double>(g, gw, "gamma_min");
  s.gains.gamma_max = get_as<double>(g, gw, "gamma_max");
  s.gains.noise_floor_eps = get_as<double>(g, gw, "noise_floor_eps");
  return s;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + origin + ": " + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  frame.validate();
  // Throws on an invalid band count.
  (void)build_band_plan(frame.fft_len, frame.sample_rate_hz, num_bands);
  if (stage1.uses_snr_feed) throw ConfigError("stage1.uses_snr_feed must be false");
  stage1.tracker.validate(num_bands);
  stage2.tracker.validate(num_bands);
  stage1.gains.validate(num_bands);
  stage2.gains.validate(num_bands);
}

json to_json(const PipelineConfig& cfg) {
  json hpf = cfg.frame.hpf_cutoff_hz ? json(*cfg.frame.hpf_cutoff_hz) : json(nullptr);
  return {
      {"preset_name", cfg.preset_name},
      {"frame",
       {{"sample_rate_hz", cfg.frame.sample_rate_hz},
        {"frame_len", cfg.frame.frame_len},
        {"hop_len", cfg.frame.hop_len},
        {"fft_len", cfg.frame.fft_len},
        {"window", std::string(to_string(cfg.frame.window))},
        {"hpf_cutoff_hz", hpf}}},
      {"num_bands", cfg.num_bands},
      {"stage1", stage_to_json(cfg.stage1)},
      {"stage2", stage_to_json(cfg.stage2)},
  };
}

PipelineConfig config_from_json(const json& doc) {
  check_keys(doc, "", {"preset_name", "frame", "num_bands", "stage1", "stage2"});
  PipelineConfig cfg;
  cfg.preset_name = get_as<std::string>(doc, "", "preset_name");
  const json& f = doc.at("frame");
  check_keys(f, "frame",
             {"sample_rate_hz", "frame_len", "hop_len", "fft_len", "window", "hpf_cutoff_hz"});
  cfg.frame.sample_rate_hz = get_as<int>(f, "frame", "sample_rate_hz");
  cfg.frame.frame_len = get_as<int>(f, "frame", "frame_len");
  cfg.frame.hop_len = get_as<int>(f, "frame", "hop_len");
  cfg.frame.fft_len = get_as<int>(f, "frame", "fft_len");
  cfg.frame.window = window_kind_from_string(get_as<std::string>(f, "frame", "window"));
  if (f.at("hpf_cutoff_hz").is_null()) {
    cfg.frame.hpf_cutoff_hz.reset();
  } else {
    cfg.frame.hpf_cutoff_hz = get_as<double>(f, "frame", "hpf_cutoff_hz");
  }
  cfg.num_bands = get_as<int>(doc, "", "num_bands");
  if (cfg.num_bands < 1) throw ConfigError("num_bands must be >= 1");
  cfg.stage1 = stage_from_json(doc.at("stage1"), "stage1", cfg.num_bands);
  cfg.stage2 = stage_from_json(doc.at("stage2"), "stage2", cfg.num_bands);
  cfg.validate();
  return cfg;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (int i = 0; i < detail::kNumBundledPresets; ++i) {
    out.emplace_back(detail::kBundledPresets[i].first);
  }
  return out;
}

json preset_json(std::string_view name) {
  if (const char* dir = std::getenv(kPresetDirEnv); dir != nullptr && *dir != '\0') {
    const auto path = std::filesystem::path(dir) / (std::string(name) + ".json");
    if (std::filesystem::exists(path)) return parse_json_text(read_text(path), path.string());
  }
  for (int i = 0; i < detail::kNumBundledPresets; ++i) {
    if (detail::kBundledPresets[i].first == name) {
      return parse_json_text(detail::kBundledPresets[i].second, "preset '" + std::string(name) + "'");
    }
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

PipelineConfig load_preset(std::string_view name) { return config_from_json(preset_json(name)); }

void merge_config_json(json& base, const json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw ConfigError("configuration document must be a JSON object");
  for (const auto& [key, value] : overlay.items()) {
    const auto full = join_key(prefix, key);
    if (!base.contains(key)) throw ConfigError("unknown configuration key '" + full + "'");
    json& slot = base[key];
    if (slot.is_object() && value.is_object()) {
      merge_config_json(slot, value, full);
    } else {
      slot = value;
    }
  }
}

void apply_override(json& doc, std::string_view dotted_key, std::string_view value) {
  json* node = &doc;
  std::string walked;
  size_t start = 0;
  while (true) {
    const size_t dot = dotted_key.find('.', start);
    const std::string part(dotted_key.substr(start, dot == std::string_view::npos ? dot : dot - start));
    walked = join_key(walked, part);
    if (part.empty() || !node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown configuration key '" + std::string(dotted_key) + "'");
    }
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  *node = parsed;
}

PipelineConfig resolve_config(std::optional<std::string> preset,
                              const std::optional<std::filesystem::path>& config_file,
                              const std::vector<std::string>& overrides) {
  json file_doc;
  if (config_file) {
    file_doc = parse_json_text(read_text(*config_file), config_file->string());
    if (!file_doc.is_object()) throw ConfigError("configuration file must hold a JSON object");
  }
  if (!preset) {
    if (file_doc.is_object() && file_doc.contains("preset_name") &&
        file_doc["preset_name"].is_string()) {
      const auto named = file_doc["preset_name"].get<std::string>();
      const auto names = preset_names();
      if (std::find(names.begin(), names.end(), named) != names.end()) preset = named;
    }
    if (!preset) preset = "communication";
  }
  json doc = preset_json(*preset);
  if (config_file) merge_config_json(doc, file_doc);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + ov + "' must have the form key=value");
    }
    apply_override(doc, std::string_view(ov).substr(0, eq), std::string_view(ov).substr(eq + 1));
  }
  return config_from_json(doc);
}

}  // namespace dsse
