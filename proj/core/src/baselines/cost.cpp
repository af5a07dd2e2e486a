#include "uniseq/baselines/cost.hpp"

#include "uniseq/common/error.hpp"

namespace uniseq::baselines {

AttentionCost attention_cost(LayoutKind kind, std::size_t T, std::size_t n_q, std::size_t layers,
                             std::size_t local_layers) {
  require(T >= 1 && n_q >= 1 && layers >= 1, "attention_cost: T, n_q and layers must be >= 1");
  using u64 = std::uint64_t;
  AttentionCost c;
  switch (kind) {
    case LayoutKind::Flatten:
    case LayoutKind::CoarseFirst: c.length = T * n_q; break;
    case LayoutKind::Parallel: c.length = T; break;
    case LayoutKind::Delay: c.length = T + n_q - 1; break;
    case LayoutKind::MultiScale:
      c.length = T;
      c.entries = u64{T} * T * layers + u64{T} * n_q * n_q * local_layers;
      return c;
  }
  c.entries = u64{c.length} * c.length * layers;
  return c;
}

}  // namespace uniseq::baselines
