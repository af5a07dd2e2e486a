#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace uniseq::task {

struct ResamplingConfig {
  std::vector<double> counts;  // examples per task, each > 0
  double alpha = 0.05;
  void validate() const;
};

// p_i = n_i^alpha / sum_j n_j^alpha.
std::vector<double> resample_weights(const ResamplingConfig& cfg);

// Draws a task index from the weights.
std::size_t sample_task(std::span<const double> weights, std::mt19937_64& rng);

}  // namespace uniseq::task
