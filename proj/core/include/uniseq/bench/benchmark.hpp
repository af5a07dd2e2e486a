#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uniseq/baselines/layout.hpp"
#include "uniseq/model/config.hpp"
#include "uniseq/nn/transformer.hpp"

namespace uniseq::bench {

struct BenchScale {
  nn::StackConfig global{8, 64, 4, 256};
  nn::StackConfig local{2, 32, 4, 128};
  std::size_t codebook = 16;
  std::size_t iters = 20;   // timed iterations, median reported
  std::size_t warmup = 3;
  std::size_t batch = 1;
  double param_tolerance = 0.10;
};

struct BenchRecord {
  std::string arch;
  std::size_t T = 0;
  std::size_t n_q = 0;
  double ms_per_iter = 0.0;
  std::uint64_t attn_pairs = 0;
  std::size_t param_count = 0;
};

// Multiscale config of a bench cell: pure-audio patches over special +
// n_q x codebook ids, context of exactly T patches.
model::ModelConfig bench_model_config(const BenchScale& scale, std::size_t T, std::size_t n_q);

// For every (T, n_q) cell and arch: identical training-step loops on seeded
// random grids. Baselines use one stack of the global width with
// global + local layers, feed-forward width matched to the multiscale
// parameter count. Throws if a counter disagrees with attention_cost or a
// budget falls outside the tolerance.
std::vector<BenchRecord> run_benchmark(const std::vector<baselines::LayoutKind>& archs,
                                       const std::vector<std::size_t>& Ts, const std::vector<std::size_t>& nqs,
                                       const BenchScale& scale, std::uint64_t seed);

std::string bench_csv(const std::vector<BenchRecord>& records);

}  // namespace uniseq::bench
