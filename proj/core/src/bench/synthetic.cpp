#include "uniseq/bench/synthetic.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "uniseq/common/error.hpp"

namespace uniseq::bench {

std::string_view rule_name(SyntheticRule r) { return r == SyntheticRule::TokenTts ? "token-tts" : "denoise"; }

SyntheticRule rule_from_name(std::string_view name) {
  if (name == "token-tts") return SyntheticRule::TokenTts;
  if (name == "denoise") return SyntheticRule::Denoise;
  fail("unknown synthetic rule '" + std::string(name) + "' (expected token-tts or denoise)");
}

void SyntheticTaskSpec::validate() const {
  require(T >= 1 && n_q >= 1 && codebook >= 1 && symbols >= 1, "synthetic: sizes must be >= 1");
  require(symbols <= codebook, "synthetic: alphabet of " + std::to_string(symbols) +
                                   " symbols exceeds codebook range of " + std::to_string(codebook));
  require(train >= 1, "synthetic: train count must be >= 1");
  if (rule == SyntheticRule::Denoise) {
    require(symbols < codebook, "synthetic: denoise needs codes outside the clean image");
    require(noise >= 0 && noise < 1, "synthetic: noise must be in [0, 1)");
    require(n_q >= 2 || noise == 0, "synthetic: denoise with noise needs n_q >= 2");
  }
}

task::Vocabulary synthetic_vocab(const SyntheticTaskSpec& spec) {
  const task::RangeSpec r[] = {{"special", task::kSpecialCount, 1}, {"audio", spec.codebook, spec.n_q},
                               {"phoneme", spec.symbols, 1}};
  return task::Vocabulary::build(r);
}

SymbolCodeTable::SymbolCodeTable(std::size_t symbols, std::size_t n_q, std::size_t codebook, std::uint64_t seed)
    : symbols_(symbols), codebook_(codebook), table_(symbols * n_q), image_(codebook * n_q, 0) {
  require(symbols <= codebook, "symbol table: more symbols than codes");
  std::mt19937_64 rng(seed ^ 0x7ab1e5eedULL);
  std::vector<std::uint32_t> perm(codebook);
  for (std::size_t k = 0; k < n_q; ++k) {
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t s = 0; s < symbols; ++s) {
      table_[k * symbols + s] = perm[s];
      image_[k * codebook + perm[s]] = 1;
    }
  }
}

std::uint64_t example_hash(const task::TaskExample& ex) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  for (char c : ex.task) mix(static_cast<unsigned char>(c));
  for (const auto& p : ex.conditions) {
    mix(0xfeedULL + p.index());
    if (const auto* d = std::get_if<task::DiscretePayload>(&p)) {
      for (auto t : d->tokens) mix(t);
    } else if (const auto* g = std::get_if<codec::TokenGrid>(&p)) {
      mix(g->levels);
      for (auto t : g->codes) mix(t);
    } else {
      for (const auto& v : std::get<task::ContinuousPayload>(p).vectors)
        for (double x : v) {
          std::uint64_t bits;
          std::memcpy(&bits, &x, sizeof bits);
          mix(bits);
        }
    }
  }
  mix(0xbeefULL);
  for (auto t : ex.target.codes) mix(t);
  return h;
}

namespace {

task::TaskExample make_example(const SyntheticTaskSpec& spec, const SymbolCodeTable& table, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> sym(0, static_cast<std::uint32_t>(spec.symbols - 1));
  std::vector<std::uint32_t> symbols(spec.T);
  for (auto& s : symbols) s = sym(rng);
  codec::TokenGrid clean(spec.T, spec.n_q);
  for (std::size_t t = 0; t < spec.T; ++t)
    for (std::size_t k = 0; k < spec.n_q; ++k) clean.at(t, k) = table.code(symbols[t], k);

  task::TaskExample ex;
  ex.task = spec.task();
  ex.target = clean;
  if (spec.rule == SyntheticRule::TokenTts) {
    std::uniform_int_distribution<std::uint32_t> code(0, static_cast<std::uint32_t>(spec.codebook - 1));
    codec::TokenGrid prompt(spec.prompt_frames, spec.n_q);
    for (auto& c : prompt.codes) c = code(rng);
    ex.conditions.emplace_back(task::DiscretePayload{symbols});
    ex.conditions.emplace_back(std::move(prompt));
    return ex;
  }
  // corrupted copy; each frame keeps at least one clean level
  codec::TokenGrid noisy = clean;
  const std::size_t cells = spec.T * spec.n_q;
  const auto n_noise = static_cast<std::size_t>(std::llround(spec.noise * static_cast<double>(cells)));
  require(n_noise <= spec.T * (spec.n_q - 1), "synthetic: noise fraction too high to keep frames recoverable");
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> hit(spec.T, 0);
  std::vector<std::uint32_t> outside;
  std::size_t placed = 0;
  for (std::size_t idx : order) {
    if (placed == n_noise) break;
    const std::size_t t = idx / spec.n_q;
    const std::size_t k = idx % spec.n_q;
    if (hit[t] + 1 == spec.n_q) continue;
    outside.clear();
    for (std::uint32_t c = 0; c < spec.codebook; ++c)
      if (!table.in_image(c, k)) outside.push_back(c);
    std::uniform_int_distribution<std::size_t> pick(0, outside.size() - 1);
    noisy.at(t, k) = outside[pick(rng)];
    ++hit[t];
    ++placed;
  }
  ex.conditions.emplace_back(std::move(noisy));
  return ex;
}

}  // namespace

SyntheticCorpus gen_synthetic_task(const SyntheticTaskSpec& spec) {
  spec.validate();
  SyntheticCorpus c{synthetic_vocab(spec), {}, {}};
  const SymbolCodeTable table(spec.symbols, spec.n_q, spec.codebook, spec.seed);
  std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(spec.rule) + 1);
  std::unordered_set<std::uint64_t> seen;
  auto fill = [&](std::vector<task::TaskExample>& out, std::size_t n) {
    std::size_t attempts = 0;
    while (out.size() < n) {
      require(++attempts <= 100 * n + 1000, "synthetic: cannot draw enough distinct examples");
      auto ex = make_example(spec, table, rng);
      if (seen.insert(example_hash(ex)).second) out.push_back(std::move(ex));
    }
  };
  fill(c.train, spec.train);
  fill(c.eval, spec.eval);
  return c;
}

codec::LatentFrames gaussian_mixture_frames(std::size_t frames, std::size_t dim, std::size_t components,
                                            std::uint64_t seed, double center_scale, double spread) {
  require(frames >= 1 && dim >= 1 && components >= 1, "gaussian mixture: sizes must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> centers(components * dim);
  for (auto& x : centers) x = center_scale * n01(rng);
  std::uniform_int_distribution<std::size_t> comp(0, components - 1);
  codec::LatentFrames out(frames, dim);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t c = comp(rng);
    auto f = out.frame(t);
    for (std::size_t d = 0; d < dim; ++d) f[d] = centers[c * dim + d] + spread * n01(rng);
  }
  return out;
}

}  // namespace uniseq::bench
