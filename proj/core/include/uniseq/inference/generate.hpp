#pragma once

#include <string_view>

#include "uniseq/inference/sampling.hpp"
#include "uniseq/model/multiscale.hpp"
#include "uniseq/task/sequence.hpp"

namespace uniseq::inference {

enum class GenStatus : std::uint8_t { Ended, LengthLimit, Invalid };
std::string_view status_name(GenStatus s);

struct GenerateResult {
  codec::TokenGrid grid;
  GenStatus status = GenStatus::Ended;
  std::size_t patches = 0;  // total patches including the prompt
};

// Two-level decode after a prompt that ends with the target's opening
// marker: one global pass per patch, then n_q local samples. A sampled
// <audio_end> at the first position of a patch ends generation. Without
// constraints, any other non-audio or wrong-level token ends it as Invalid.
GenerateResult generate(const model::MultiScaleModel& model, const task::Vocabulary& vocab,
                        const task::TaskSequence& prefix, const SamplingConfig& cfg);

}  // namespace uniseq::inference
