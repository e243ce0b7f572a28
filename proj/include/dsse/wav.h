#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

namespace dsse {

enum class SampleFormat { kPcm16, kFloat32 };

std::string_view to_string(SampleFormat format);

// Decoded WAV file. Samples are interleaved and normalized to [-1, 1]
// (PCM16 divided by 32768).
struct WavData {
  int sample_rate_hz = 16000;
  int channels = 1;
  SampleFormat format = SampleFormat::kPcm16;
  std::vector<double> samples;

  size_t frames() const { return channels > 0 ? samples.size() / static_cast<size_t>(channels) : 0; }
};

// Reads 16-bit PCM or 32-bit IEEE float WAV (plain or extensible header).
// Throws IoError naming the unsupported property.
WavData read_wav(const std::filesystem::path& path);

// Writes in wav.format. PCM16 is scaled by 32768, rounded and saturated, so
// read -> write reproduces the original file's samples exactly.
void write_wav(const std::filesystem::path& path, const WavData& wav);

}  // namespace dsse
