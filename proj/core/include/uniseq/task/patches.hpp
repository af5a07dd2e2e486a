#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "uniseq/codec/rvq.hpp"
#include "uniseq/task/sequence.hpp"

namespace uniseq::task {

inline constexpr std::size_t kDefaultMaxPatches = 3000;

enum class PatchKind : std::uint8_t { AudioFrame, RepeatedDiscrete, Continuous };

// K patches of width n_q. tokens holds the n_q local prediction targets of
// each patch as global ids: the frame's codes, the repeated token, or
// <continuous_token> copies.
struct PatchSequence {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t width = 0;
  std::vector<PatchKind> kinds;
  std::vector<std::uint32_t> tokens;
  std::vector<std::uint8_t> in_target;  // target frames and the closing target marker
  std::vector<std::size_t> vector_index;
  std::vector<std::vector<double>> vectors;

  std::size_t size() const { return kinds.size(); }
  std::span<const std::uint32_t> patch(std::size_t i) const { return {tokens.data() + i * width, width}; }

  void push_repeated(std::uint32_t id, bool target = false);
  void push_frame(std::span<const std::uint32_t> ids, bool target = false);
  void push_continuous(std::vector<double> v, std::uint32_t placeholder);
  bool operator==(const PatchSequence&) const = default;
};

// Throws "context overflow" when K would exceed max_patches.
PatchSequence to_patches(const Vocabulary& vocab, const TaskSequence& seq,
                         std::size_t max_patches = kDefaultMaxPatches);
// Bare audio: one AudioFrame patch per grid frame.
PatchSequence patches_from_grid(const Vocabulary& vocab, const codec::TokenGrid& grid,
                                std::size_t max_patches = kDefaultMaxPatches);

}  // namespace uniseq::task
