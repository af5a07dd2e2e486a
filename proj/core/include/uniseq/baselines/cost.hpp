#pragma once

#include <cstdint>

#include "uniseq/baselines/layout.hpp"

namespace uniseq::baselines {

struct AttentionCost {
  std::uint64_t entries = 0;  // attention score-matrix entries over all layers
  std::size_t length = 0;     // sequence length seen by the (global) attention
  bool operator==(const AttentionCost&) const = default;
};

// Closed forms per layout. `layers` is the single stack depth for baselines
// and the global depth for multiscale; `local_layers` is used by multiscale
// only.
AttentionCost attention_cost(LayoutKind kind, std::size_t T, std::size_t n_q, std::size_t layers,
                             std::size_t local_layers = 0);

}  // namespace uniseq::baselines
