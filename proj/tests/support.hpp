#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <random>
#include <span>
#include <vector>

#include "uniseq/task/sequence.hpp"

namespace uniseq::testing {

inline codec::TokenGrid random_grid(std::size_t frames, std::size_t levels, std::size_t codebook,
                                    std::mt19937_64& rng) {
  codec::TokenGrid g(frames, levels);
  for (auto& c : g.codes) c = static_cast<std::uint32_t>(rng() % codebook);
  return g;
}

// One random payload of the slot's modality, 1..max_len items.
inline task::Payload random_payload(const task::Vocabulary& vocab, const task::Slot& slot, std::mt19937_64& rng,
                                    std::size_t max_len = 12) {
  const std::size_t len = 1 + rng() % max_len;
  switch (slot.kind) {
    case task::SpanKind::Text: {
      task::ContinuousPayload c;
      std::normal_distribution<double> d;
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> v(8);
        for (auto& x : v) x = d(rng);
        c.vectors.push_back(std::move(v));
      }
      return c;
    }
    case task::SpanKind::Audio:
    case task::SpanKind::Prompt:
      return random_grid(len, vocab.audio_levels(), vocab.codebook_size(), rng);
    default: {
      const auto& r = vocab.range(task::span_modality(slot.kind));
      task::DiscretePayload p;
      for (std::size_t i = 0; i < len; ++i) p.tokens.push_back(static_cast<std::uint32_t>(rng() % r.size));
      return p;
    }
  }
}

inline task::TaskExample random_example(const task::Vocabulary& vocab, const task::TaskTemplate& tmpl,
                                        std::mt19937_64& rng) {
  task::TaskExample ex;
  ex.task = tmpl.task;
  for (const auto& s : tmpl.conditions) ex.conditions.push_back(random_payload(vocab, s, rng));
  ex.target = random_grid(1 + rng() % 12, vocab.audio_levels(), vocab.codebook_size(), rng);
  return ex;
}

// Upper-tail p-value of Pearson's statistic against expected probabilities;
// cells with zero expectation must have zero counts and are skipped.
inline double chi_square_p(std::span<const std::size_t> counts, std::span<const double> probs) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    const double e = probs[i] * total;
    stat += (static_cast<double>(counts[i]) - e) * (static_cast<double>(counts[i]) - e) / e;
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(cells - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace uniseq::testing
