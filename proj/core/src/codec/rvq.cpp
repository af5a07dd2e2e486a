#include "uniseq/codec/rvq.hpp"

#include <cmath>

#include "uniseq/codec/kmeans.hpp"
#include "uniseq/common/error.hpp"

namespace uniseq::codec {

CodebookSet CodebookSet::truncated(std::size_t n) const {
  require(n >= 1 && n <= levels, "codebooks: cannot keep " + std::to_string(n) + " of " +
                                     std::to_string(levels) + " levels");
  CodebookSet out(n, size, dim);
  std::copy_n(data.begin(), n * size * dim, out.data.begin());
  return out;
}

void CodebookSet::validate() const {
  require(levels >= 1 && size >= 1 && dim >= 1, "codebooks: empty dimensions");
  require(data.size() == levels * size * dim, "codebooks: data size does not match dimensions");
  for (double v : data) require(std::isfinite(v), "codebooks: non-finite quantizer vector");
}

void TokenGrid::validate(std::size_t codebook_size) const {
  require(levels >= 1, "token grid: levels must be >= 1");
  require(codes.size() % levels == 0, "token grid: not rectangular");
  for (std::size_t i = 0; i < codes.size(); ++i)
    if (codes[i] >= codebook_size)
      fail("token grid: code " + std::to_string(codes[i]) + " at frame " + std::to_string(i / levels) +
           " level " + std::to_string(i % levels) + " outside [0, " + std::to_string(codebook_size) + ")");
}

void rvq_encode_frame(std::span<const double> h, const CodebookSet& books, std::span<std::uint32_t> codes,
                      std::span<double> residual_norms) {
  require(h.size() == books.dim, "rvq_encode: frame dim " + std::to_string(h.size()) + " != codebook dim " +
                                     std::to_string(books.dim));
  require(codes.size() == books.levels, "rvq_encode: code buffer size mismatch");
  std::vector<double> residual(h.begin(), h.end());
  for (std::size_t k = 0; k < books.levels; ++k) {
    const std::uint32_t m = nearest_centroid(residual, books.level(k), books.dim);
    codes[k] = m;
    auto q = books.vector(k, m);
    double norm = 0.0;
    for (std::size_t j = 0; j < books.dim; ++j) {
      residual[j] -= q[j];
      norm += residual[j] * residual[j];
    }
    if (!residual_norms.empty()) residual_norms[k] = std::sqrt(norm);
  }
}

TokenGrid rvq_encode(const LatentFrames& frames, const CodebookSet& books) {
  require(frames.dim == books.dim, "rvq_encode: latent dim " + std::to_string(frames.dim) +
                                       " != codebook dim " + std::to_string(books.dim));
  TokenGrid grid(frames.frames(), books.levels);
  for (std::size_t t = 0; t < frames.frames(); ++t)
    rvq_encode_frame(frames.frame(t), books, {grid.codes.data() + t * books.levels, books.levels});
  return grid;
}

LatentFrames rvq_decode(const TokenGrid& grid, const CodebookSet& books) {
  require(grid.levels == books.levels, "rvq_decode: grid has " + std::to_string(grid.levels) +
                                           " levels, codebooks " + std::to_string(books.levels));
  grid.validate(books.size);
  LatentFrames out(grid.frames(), books.dim);
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    auto f = out.frame(t);
    for (std::size_t k = 0; k < grid.levels; ++k) {
      auto q = books.vector(k, grid.at(t, k));
      for (std::size_t j = 0; j < books.dim; ++j) f[j] += q[j];
    }
  }
  return out;
}

CodebookTraining train_codebooks_detailed(std::span<const LatentFrames> corpus, const CodecConfig& cfg,
                                          std::size_t iters, std::uint64_t seed) {
  cfg.validate();
  require(iters >= 1, "train_codebooks: iters must be >= 1");
  std::vector<double> residual;
  for (const auto& f : corpus) {
    require(f.dim == cfg.latent_dim, "train_codebooks: corpus frame dim " + std::to_string(f.dim) +
                                         " != latent_dim " + std::to_string(cfg.latent_dim));
    residual.insert(residual.end(), f.data.begin(), f.data.end());
  }
  const std::size_t dim = cfg.latent_dim;
  const std::size_t n = residual.size() / dim;
  require(n >= cfg.codebook_size, "train_codebooks: corpus of " + std::to_string(n) +
                                      " frames is smaller than codebook size " +
                                      std::to_string(cfg.codebook_size));

  CodebookTraining out{CodebookSet(cfg.levels, cfg.codebook_size, dim), {}};
  for (std::size_t k = 0; k < cfg.levels; ++k) {
    // Deeper levels keep a zero vector so a level never increases a frame's residual.
    KMeansOptions opt{cfg.codebook_size, iters, seed + 0x9e3779b97f4a7c15ULL * (k + 1), k > 0};
    KMeansResult km = kmeans(residual, dim, opt);
    std::copy(km.centroids.begin(), km.centroids.end(), out.books.data.begin() +
                                                            static_cast<std::ptrdiff_t>(k * cfg.codebook_size * dim));
    for (std::size_t i = 0; i < n; ++i) {
      const double* c = km.centroids.data() + km.assignment[i] * dim;
      for (std::size_t j = 0; j < dim; ++j) residual[i * dim + j] -= c[j];
    }
    out.mse_history.push_back(std::move(km.mse_history));
  }
  return out;
}

CodebookSet train_codebooks(std::span<const LatentFrames> corpus, const CodecConfig& cfg, std::size_t iters,
                            std::uint64_t seed) {
  return train_codebooks_detailed(corpus, cfg, iters, seed).books;
}

double quantization_mse(const LatentFrames& frames, const CodebookSet& books) {
  const LatentFrames rec = rvq_decode(rvq_encode(frames, books), books);
  double total = 0.0;
  for (std::size_t i = 0; i < frames.data.size(); ++i) {
    const double d = frames.data[i] - rec.data[i];
    total += d * d;
  }
  return frames.data.empty() ? 0.0 : total / static_cast<double>(frames.data.size());
}

std::vector<std::uint32_t> flatten(const TokenGrid& grid) { return grid.codes; }

TokenGrid unflatten(std::span<const std::uint32_t> seq, std::size_t levels) {
  require(levels >= 1, "unflatten: levels must be >= 1");
  require(seq.size() % levels == 0, "unflatten: length " + std::to_string(seq.size()) +
                                        " is not divisible by n_q=" + std::to_string(levels));
  TokenGrid g;
  g.levels = levels;
  g.codes.assign(seq.begin(), seq.end());
  return g;
}

}  // namespace uniseq::codec
