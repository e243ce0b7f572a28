#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dsse/framing.h"
#include "dsse/gain.h"
#include "dsse/noise_tracking.h"

namespace dsse {

// Parameters of one suppression stage (tracking, gain rule, gain smoothing).
struct StageConfig {
  TrackerParams tracker;
  GainParams gains;
  bool uses_snr_feed = false;  // Stage-2 only: scale alpha by Stage-1 SNR

  bool operator==(const StageConfig&) const = default;
};

// Full parameter set of the dual-stage suppressor. Frozen for a stream's
// lifetime; both stages share one band plan.
struct PipelineConfig {
  std::string preset_name = "custom";
  FrameConfig frame;
  int num_bands = 33;
  StageConfig stage1;
  StageConfig stage2;

  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Environment variable naming a directory of <preset>.json files that take
// precedence over the bundled presets.
inline constexpr const char* kPresetDirEnv = "DSSE_PRESET_DIR";

nlohmann::json to_json(const PipelineConfig& cfg);

// Strict parse: every key must be present and known. Per-band fields accept
// a number (broadcast) or an array of num_bands numbers. Throws ConfigError
// naming the offending dotted key.
PipelineConfig config_from_json(const nlohmann::json& doc);

std::vector<std::string> preset_names();
nlohmann::json preset_json(std::string_view name);
PipelineConfig load_preset(std::string_view name);

// Recursively overlays `overlay` onto `base`. Every overlay key must already
// exist in `base`.
void merge_config_json(nlohmann::json& base, const nlohmann::json& overlay,
                       const std::string& prefix = "");

// Sets `dotted_key` (e.g. "stage2.gain.mu") to `value`, parsed as JSON when
// possible and as a string otherwise. Unknown keys throw ConfigError.
void apply_override(nlohmann::json& doc, std::string_view dotted_key, std::string_view value);

// preset defaults < config file < overrides ("key=value"). The preset is
// `preset` if given, else the config file's preset_name, else
// "communication".
PipelineConfig resolve_config(std::optional<std::string> preset,
                              const std::optional<std::filesystem::path>& config_file,
                              const std::vector<std::string>& overrides);

}  // namespace dsse
