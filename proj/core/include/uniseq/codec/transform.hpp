#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uniseq/codec/audio.hpp"

namespace uniseq::codec {

struct CodecConfig {
  std::size_t hop = 320;           // samples per frame (S)
  std::size_t latent_dim = 320;    // L, at most hop
  std::size_t levels = 3;          // n_q
  std::size_t codebook_size = 1024;  // V per level
  std::uint32_t sample_rate = 16000;
  std::uint64_t transform_seed = 0x5eed;

  void validate() const;
  double frames_per_second() const;
  double tokens_per_second() const;
};

// T frames of L-dim latent vectors, row-major.
struct LatentFrames {
  std::size_t dim = 0;
  std::vector<double> data;

  LatentFrames() = default;
  LatentFrames(std::size_t frames, std::size_t dim) : dim(dim), data(frames * dim, 0.0) {}

  std::size_t frames() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<double> frame(std::size_t t) { return {data.data() + t * dim, dim}; }
  std::span<const double> frame(std::size_t t) const { return {data.data() + t * dim, dim}; }
  bool operator==(const LatentFrames&) const = default;
};

// Fixed framing transform standing in for the neural encoder/decoder: each
// S-sample window is projected by the first L rows of a seeded orthogonal
// S x S matrix. With L == S the pair is an exact inverse.
class FramingTransform {
 public:
  explicit FramingTransform(const CodecConfig& cfg);

  // T = floor(len / S); the trailing partial window is dropped.
  LatentFrames analyze(const AudioSignal& signal) const;
  // Length T*S signal. Values are clamped into [-1, 1].
  AudioSignal synthesize(const LatentFrames& frames) const;

  const CodecConfig& config() const { return cfg_; }
  // L x S row-major basis.
  const std::vector<double>& basis() const { return basis_; }

 private:
  CodecConfig cfg_;
  std::vector<double> basis_;
};

LatentFrames analyze(const AudioSignal& signal, const CodecConfig& cfg);
AudioSignal synthesize(const LatentFrames& frames, const CodecConfig& cfg);

}  // namespace uniseq::codec
