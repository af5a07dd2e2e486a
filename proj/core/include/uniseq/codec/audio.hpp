#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace uniseq::codec {

struct AudioSignal {
  std::vector<double> samples;  // each in [-1, 1]
  std::uint32_t sample_rate = 16000;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  // Throws if empty, sample_rate is 0, or a sample falls outside [-1, 1].
  void validate() const;
};

// 16-bit PCM mono little-endian WAV. Other encodings are rejected with a
// FormatError naming the offending header field.
AudioSignal decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(const AudioSignal& signal);

AudioSignal read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

}  // namespace uniseq::codec
