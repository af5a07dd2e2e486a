#include "uniseq/codec/audio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uniseq/common/binary_io.hpp"
#include "uniseq/common/error.hpp"

namespace uniseq::codec {

void AudioSignal::validate() const {
  require(!samples.empty(), "audio: signal is empty");
  require(sample_rate > 0, "audio: sample rate must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] >= -1.0 && samples[i] <= 1.0))
      fail("audio: sample " + std::to_string(i) + " outside [-1, 1]");
  }
}

namespace {

std::uint16_t read_u16(io::ByteReader& r) {
  const auto b = r.bytes(2);
  return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[0]) | (static_cast<std::uint8_t>(b[1]) << 8));
}

}  // namespace

AudioSignal decode_wav(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "wav");
  r.expect_magic("RIFF");
  r.u32();
  r.expect_magic("WAVE");
  bool have_fmt = false;
  AudioSignal sig;
  while (!r.at_end()) {
    const std::string id = r.bytes(4);
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw FormatError("wav: fmt chunk too short");
      const std::uint16_t format = read_u16(r);
      const std::uint16_t channels = read_u16(r);
      sig.sample_rate = r.u32();
      r.u32();  // byte rate
      r.bytes(2);  // block align
      const std::uint16_t bits = read_u16(r);
      if (format != 1) throw FormatError("wav: audio format " + std::to_string(format) + " is not PCM (1)");
      if (channels != 1) throw FormatError("wav: " + std::to_string(channels) + " channels, only mono supported");
      if (bits != 16) throw FormatError("wav: " + std::to_string(bits) + " bits per sample, only 16 supported");
      if (sig.sample_rate == 0) throw FormatError("wav: zero sample rate");
      r.bytes(size - 16 + (size & 1));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (size % 2 != 0) throw FormatError("wav: odd data chunk size");
      const std::string raw = r.bytes(size);
      sig.samples.resize(size / 2);
      for (std::size_t i = 0; i < sig.samples.size(); ++i) {
        const auto lo = static_cast<std::uint8_t>(raw[2 * i]);
        const auto hi = static_cast<std::uint8_t>(raw[2 * i + 1]);
        const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        sig.samples[i] = static_cast<double>(v) / 32768.0;
      }
      if (sig.samples.empty()) throw FormatError("wav: no samples");
      return sig;
    } else {
      r.bytes(size + (size & 1));
    }
  }
  throw FormatError("wav: missing data chunk");
}

std::vector<std::uint8_t> encode_wav(const AudioSignal& signal) {
  signal.validate();
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  io::ByteWriter w;
  w.magic("RIFF");
  w.u32(36 + data_bytes);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.bytes(std::string("\x01\x00\x01\x00", 4));  // PCM, mono
  w.u32(signal.sample_rate);
  w.u32(signal.sample_rate * 2);
  w.bytes(std::string("\x02\x00\x10\x00", 4));  // block align 2, 16 bits
  w.magic("data");
  w.u32(data_bytes);
  std::string pcm(signal.samples.size() * 2, '\0');
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    const double scaled = std::round(signal.samples[i] * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    const auto u = static_cast<std::uint16_t>(v);
    pcm[2 * i] = static_cast<char>(u & 0xff);
    pcm[2 * i + 1] = static_cast<char>(u >> 8);
  }
  w.bytes(pcm);
  return w.buffer();
}

AudioSignal read_wav(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  io::write_file(path, encode_wav(signal));
}

}  // namespace uniseq::codec
