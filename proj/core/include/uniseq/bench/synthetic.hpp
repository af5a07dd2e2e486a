#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "uniseq/codec/transform.hpp"
#include "uniseq/task/sequence.hpp"

namespace uniseq::bench {

enum class SyntheticRule : std::uint8_t { TokenTts, Denoise };
std::string_view rule_name(SyntheticRule r);
SyntheticRule rule_from_name(std::string_view name);

struct SyntheticTaskSpec {
  SyntheticRule rule = SyntheticRule::TokenTts;
  std::size_t train = 2000;
  std::size_t eval = 200;
  std::size_t T = 16;
  std::size_t n_q = 3;
  std::size_t codebook = 64;
  std::size_t symbols = 32;
  std::size_t prompt_frames = 2;  // token-TTS prompt length
  double noise = 0.2;             // denoise: fraction of substituted codes
  std::uint64_t seed = 1;

  std::string task() const { return rule == SyntheticRule::TokenTts ? "tts" : "se"; }
  void validate() const;
};

// special:128, audio:n_q x codebook, phoneme:symbols.
task::Vocabulary synthetic_vocab(const SyntheticTaskSpec& spec);

// Level-k code of a symbol: an injective map symbols -> codebook per level,
// shared by every rule with the same seed table.
class SymbolCodeTable {
 public:
  SymbolCodeTable(std::size_t symbols, std::size_t n_q, std::size_t codebook, std::uint64_t seed);
  std::uint32_t code(std::size_t symbol, std::size_t level) const { return table_[level * symbols_ + symbol]; }
  bool in_image(std::uint32_t code, std::size_t level) const { return image_[level * codebook_ + code] != 0; }
  std::size_t symbols() const { return symbols_; }

 private:
  std::size_t symbols_, codebook_;
  std::vector<std::uint32_t> table_;
  std::vector<std::uint8_t> image_;
};

struct SyntheticCorpus {
  task::Vocabulary vocab;
  std::vector<task::TaskExample> train;
  std::vector<task::TaskExample> eval;
};

// token-TTS: phoneme symbols (durations removed) + random prompt -> grid with
// z_t^k = table(symbol_t, k). denoise: clean grid from random symbols, the
// condition has round(noise * T * n_q) codes replaced by codes outside that
// level's clean image, never every level of one frame. Train and eval are
// disjoint.
SyntheticCorpus gen_synthetic_task(const SyntheticTaskSpec& spec);

// Stable 64-bit hash of an example's payloads, for overlap checks.
std::uint64_t example_hash(const task::TaskExample& ex);

// Seeded corpus of latent frames drawn from a mixture of Gaussians.
codec::LatentFrames gaussian_mixture_frames(std::size_t frames, std::size_t dim, std::size_t components,
                                            std::uint64_t seed, double center_scale = 1.0, double spread = 0.3);

}  // namespace uniseq::bench
