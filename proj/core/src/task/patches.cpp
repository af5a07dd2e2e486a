#include "uniseq/task/patches.hpp"

#include "uniseq/common/error.hpp"

namespace uniseq::task {

void PatchSequence::push_repeated(std::uint32_t id, bool target) {
  kinds.push_back(PatchKind::RepeatedDiscrete);
  tokens.insert(tokens.end(), width, id);
  in_target.push_back(target ? 1 : 0);
  vector_index.push_back(npos);
}

void PatchSequence::push_frame(std::span<const std::uint32_t> ids, bool target) {
  require(ids.size() == width, "patch: frame of " + std::to_string(ids.size()) + " codes, width is " +
                                   std::to_string(width));
  kinds.push_back(PatchKind::AudioFrame);
  tokens.insert(tokens.end(), ids.begin(), ids.end());
  in_target.push_back(target ? 1 : 0);
  vector_index.push_back(npos);
}

void PatchSequence::push_continuous(std::vector<double> v, std::uint32_t placeholder) {
  kinds.push_back(PatchKind::Continuous);
  tokens.insert(tokens.end(), width, placeholder);
  in_target.push_back(0);
  vector_index.push_back(vectors.size());
  vectors.push_back(std::move(v));
}

namespace {

void check_context(std::size_t k, std::size_t max_patches) {
  require(k <= max_patches, "context overflow: " + std::to_string(k) + " patches exceeds max context of " +
                                std::to_string(max_patches));
}

}  // namespace

PatchSequence to_patches(const Vocabulary& vocab, const TaskSequence& seq, std::size_t max_patches) {
  const std::size_t nq = vocab.audio_levels();
  PatchSequence ps;
  ps.width = nq;
  std::size_t pos = 0;
  std::size_t cont = 0;
  auto plain_until = [&](std::size_t end) {
    for (; pos < end; ++pos) ps.push_repeated(seq.tokens[pos]);
  };
  for (const auto& s : seq.spans) {
    require(s.begin >= pos && s.end >= s.begin && s.end <= seq.tokens.size(), "patches: malformed span records");
    plain_until(s.begin);
    if (s.kind == SpanKind::Audio || s.kind == SpanKind::Prompt) {
      require((s.end - s.begin) % nq == 0, "patches: audio span not divisible by n_q");
      for (; pos < s.end; pos += nq)
        ps.push_frame(std::span<const std::uint32_t>(seq.tokens.data() + pos, nq), s.target);
    } else if (s.kind == SpanKind::Text) {
      for (; pos < s.end; ++pos) {
        require(cont < seq.continuous.size(), "patches: continuous placeholder without a vector");
        ps.push_continuous(seq.continuous[cont++], special::kContinuous);
      }
    } else {
      plain_until(s.end);
    }
    if (s.target && pos < seq.tokens.size()) {
      // closing <audio_end> is predicted as part of the target
      ps.push_repeated(seq.tokens[pos], true);
      ++pos;
    }
    check_context(ps.size(), max_patches);
  }
  plain_until(seq.tokens.size());
  check_context(ps.size(), max_patches);
  return ps;
}

PatchSequence patches_from_grid(const Vocabulary& vocab, const codec::TokenGrid& grid, std::size_t max_patches) {
  require(grid.levels == vocab.audio_levels(), "patches: grid levels do not match vocabulary");
  grid.validate(vocab.codebook_size());
  check_context(grid.frames(), max_patches);
  PatchSequence ps;
  ps.width = grid.levels;
  std::vector<std::uint32_t> ids(grid.levels);
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    for (std::size_t k = 0; k < grid.levels; ++k) ids[k] = vocab.audio_id(k, grid.at(t, k));
    ps.push_frame(ids, true);
  }
  return ps;
}

}  // namespace uniseq::task
