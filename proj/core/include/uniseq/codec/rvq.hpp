#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uniseq/codec/transform.hpp"

namespace uniseq::codec {

// levels x size quantizer vectors of dimension dim.
struct CodebookSet {
  std::size_t levels = 0;
  std::size_t size = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  CodebookSet() = default;
  CodebookSet(std::size_t levels, std::size_t size, std::size_t dim)
      : levels(levels), size(size), dim(dim), data(levels * size * dim, 0.0) {}

  std::span<const double> level(std::size_t k) const { return {data.data() + k * size * dim, size * dim}; }
  std::span<double> vector(std::size_t k, std::size_t m) { return {data.data() + (k * size + m) * dim, dim}; }
  std::span<const double> vector(std::size_t k, std::size_t m) const {
    return {data.data() + (k * size + m) * dim, dim};
  }
  // Keeps the first `n` levels.
  CodebookSet truncated(std::size_t n) const;
  void validate() const;
  bool operator==(const CodebookSet&) const = default;
};

// frames x levels matrix of codes, stored frame-major.
struct TokenGrid {
  std::size_t levels = 0;
  std::vector<std::uint32_t> codes;

  TokenGrid() = default;
  TokenGrid(std::size_t frames, std::size_t levels) : levels(levels), codes(frames * levels, 0) {}

  std::size_t frames() const { return levels == 0 ? 0 : codes.size() / levels; }
  std::uint32_t& at(std::size_t t, std::size_t k) { return codes[t * levels + k]; }
  std::uint32_t at(std::size_t t, std::size_t k) const { return codes[t * levels + k]; }
  // Throws unless every code is below `codebook_size`.
  void validate(std::size_t codebook_size) const;
  bool operator==(const TokenGrid&) const = default;
};

// Residual quantization of one frame. residual_norms, if non-empty, must
// have `levels` slots and receives ||residual|| after each level.
void rvq_encode_frame(std::span<const double> h, const CodebookSet& books, std::span<std::uint32_t> codes,
                      std::span<double> residual_norms = {});

TokenGrid rvq_encode(const LatentFrames& frames, const CodebookSet& books);
LatentFrames rvq_decode(const TokenGrid& grid, const CodebookSet& books);

// Per-level residual k-means over every frame in the corpus.
struct CodebookTraining {
  CodebookSet books;
  std::vector<std::vector<double>> mse_history;  // per level, per k-means iteration
};
CodebookTraining train_codebooks_detailed(std::span<const LatentFrames> corpus, const CodecConfig& cfg,
                                          std::size_t iters, std::uint64_t seed);
CodebookSet train_codebooks(std::span<const LatentFrames> corpus, const CodecConfig& cfg, std::size_t iters,
                            std::uint64_t seed);

// Mean over frames of the squared reconstruction error ||h - decode(encode(h))||^2 / dim.
double quantization_mse(const LatentFrames& frames, const CodebookSet& books);

// Frame-major flattening: [z_1^1 .. z_1^nq, z_2^1, ...].
std::vector<std::uint32_t> flatten(const TokenGrid& grid);
TokenGrid unflatten(std::span<const std::uint32_t> seq, std::size_t levels);

}  // namespace uniseq::codec
