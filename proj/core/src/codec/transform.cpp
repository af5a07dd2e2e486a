#include "uniseq/codec/transform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "uniseq/common/error.hpp"

namespace uniseq::codec {

void CodecConfig::validate() const {
  require(hop >= 1, "codec: hop must be >= 1");
  require(latent_dim >= 1, "codec: latent_dim must be >= 1");
  require(latent_dim <= hop, "codec: latent_dim " + std::to_string(latent_dim) + " exceeds hop " +
                                 std::to_string(hop));
  require(levels >= 1, "codec: levels must be >= 1");
  require(codebook_size >= 2, "codec: codebook_size must be >= 2");
  require(sample_rate >= 1, "codec: sample_rate must be >= 1");
}

double CodecConfig::frames_per_second() const {
  return static_cast<double>(sample_rate) / static_cast<double>(hop);
}

double CodecConfig::tokens_per_second() const { return frames_per_second() * static_cast<double>(levels); }

FramingTransform::FramingTransform(const CodecConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto S = static_cast<Eigen::Index>(cfg_.hop);
  std::mt19937_64 rng(cfg_.transform_seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd g(S, S);
  for (Eigen::Index c = 0; c < S; ++c)
    for (Eigen::Index r = 0; r < S; ++r) g(r, c) = dist(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  basis_.resize(cfg_.latent_dim * cfg_.hop);
  // Rows of the basis are columns of Q.
  for (std::size_t l = 0; l < cfg_.latent_dim; ++l)
    for (std::size_t s = 0; s < cfg_.hop; ++s)
      basis_[l * cfg_.hop + s] = q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(l));
}

LatentFrames FramingTransform::analyze(const AudioSignal& signal) const {
  signal.validate();
  require(signal.samples.size() >= cfg_.hop, "analyze: signal of " + std::to_string(signal.samples.size()) +
                                                 " samples is shorter than one hop (" +
                                                 std::to_string(cfg_.hop) + ")");
  const std::size_t T = signal.samples.size() / cfg_.hop;
  LatentFrames out(T, cfg_.latent_dim);
  for (std::size_t t = 0; t < T; ++t) {
    const double* win = signal.samples.data() + t * cfg_.hop;
    auto f = out.frame(t);
    for (std::size_t l = 0; l < cfg_.latent_dim; ++l) {
      const double* b = basis_.data() + l * cfg_.hop;
      double acc = 0.0;
      for (std::size_t s = 0; s < cfg_.hop; ++s) acc += b[s] * win[s];
      f[l] = acc;
    }
  }
  return out;
}

AudioSignal FramingTransform::synthesize(const LatentFrames& frames) const {
  require(frames.dim == cfg_.latent_dim, "synthesize: frame dim " + std::to_string(frames.dim) +
                                             " != latent_dim " + std::to_string(cfg_.latent_dim));
  AudioSignal sig;
  sig.sample_rate = cfg_.sample_rate;
  sig.samples.assign(frames.frames() * cfg_.hop, 0.0);
  for (std::size_t t = 0; t < frames.frames(); ++t) {
    double* win = sig.samples.data() + t * cfg_.hop;
    auto f = frames.frame(t);
    for (std::size_t l = 0; l < cfg_.latent_dim; ++l) {
      const double* b = basis_.data() + l * cfg_.hop;
      for (std::size_t s = 0; s < cfg_.hop; ++s) win[s] += f[l] * b[s];
    }
  }
  for (double& v : sig.samples) v = std::clamp(v, -1.0, 1.0);
  return sig;
}

LatentFrames analyze(const AudioSignal& signal, const CodecConfig& cfg) {
  return FramingTransform(cfg).analyze(signal);
}

AudioSignal synthesize(const LatentFrames& frames, const CodecConfig& cfg) {
  return FramingTransform(cfg).synthesize(frames);
}

}  // namespace uniseq::codec
