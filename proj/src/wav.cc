#include "dsse/wav.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "dsse/errors.h"

namespace dsse {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

std::string_view to_string(SampleFormat format) {
  return format == SampleFormat::kPcm16 ? "pcm16" : "float32";
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError(name + ": not a RIFF/WAVE file");
  }

  WavData wav;
  std::uint16_t format_tag = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const size_t body = pos + 8;
    const size_t avail = std::min<size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw IoError(name + ": truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format_tag = le16(f);
      wav.channels = le16(f + 2);
      wav.sample_rate_hz = static_cast<int>(le32(f + 4));
      bits = le16(f + 14);
      if (format_tag == kFormatExtensible) {
        if (avail < 26) throw IoError(name + ": truncated extensible fmt chunk");
        format_tag = le16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw IoError(name + ": data chunk before fmt chunk");
      if (wav.channels < 1) throw IoError(name + ": invalid channel count");
      const unsigned char* d = bytes.data() + body;
      if (format_tag == kFormatPcm && bits == 16) {
        wav.format = SampleFormat::kPcm16;
        const size_t n = avail / 2;
        wav.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          wav.samples[i] = static_cast<std::int16_t>(le16(d + 2 * i)) / 32768.0;
        }
      } else if (format_tag == kFormatFloat && bits == 32) {
        wav.format = SampleFormat::kFloat32;
        const size_t n = avail / 4;
        wav.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          wav.samples[i] = std::bit_cast<float>(le32(d + 4 * i));
        }
      } else {
        throw IoError(name + ": unsupported sample format (format tag " +
                      std::to_string(format_tag) + ", " + std::to_string(bits) +
                      " bits); expected 16-bit PCM or 32-bit float");
      }
      wav.samples.resize(wav.samples.size() - wav.samples.size() % static_cast<size_t>(wav.channels));
      return wav;
    }
    pos = body + size + (size & 1u);
  }
  throw IoError(name + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const WavData& wav) {
  const bool pcm = wav.format == SampleFormat::kPcm16;
  const std::uint16_t bytes_per_sample = pcm ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(wav.samples.size() * bytes_per_sample);
  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, pcm ? kFormatPcm : kFormatFloat);
  put16(out, static_cast<std::uint16_t>(wav.channels));
  put32(out, static_cast<std::uint32_t>(wav.sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(wav.sample_rate_hz * wav.channels * bytes_per_sample));
  put16(out, static_cast<std::uint16_t>(wav.channels * bytes_per_sample));
  put16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  put_tag(out, "data");
  put32(out, data_size);
  for (double s : wav.samples) {
    if (pcm) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace dsse
