#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "uniseq/task/patches.hpp"

namespace uniseq::inference {

struct SamplingConfig {
  std::size_t k = 30;
  double temperature = 0.8;
  std::uint64_t seed = 0;
  std::size_t max_patches = task::kDefaultMaxPatches;
  bool constrain = true;  // mask tokens that cannot appear at the current target position

  void validate() const;
};

// Probabilities after temperature scaling and top-k truncation (ties keep
// the lower index). Entries with allowed[i] == false, when given, are
// excluded before truncation; k is clipped to the number of allowed ids.
std::vector<double> top_k_probs(std::span<const double> logits, std::size_t k, double temperature,
                                const std::vector<bool>* allowed = nullptr);

std::size_t top_k_sample(std::span<const double> logits, std::size_t k, double temperature, std::mt19937_64& rng,
                         const std::vector<bool>* allowed = nullptr);

}  // namespace uniseq::inference
