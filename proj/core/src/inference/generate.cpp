#include "uniseq/inference/generate.hpp"

#include <algorithm>

#include "uniseq/common/error.hpp"

namespace uniseq::inference {

std::string_view status_name(GenStatus s) {
  switch (s) {
    case GenStatus::Ended: return "ended";
    case GenStatus::LengthLimit: return "length-limit";
    case GenStatus::Invalid: return "invalid";
  }
  return "?";
}

GenerateResult generate(const model::MultiScaleModel& model, const task::Vocabulary& vocab,
                        const task::TaskSequence& prefix, const SamplingConfig& cfg) {
  cfg.validate();
  const auto& mc = model.cfg;
  const std::size_t nq = mc.n_q;
  require(vocab.audio_levels() == nq, "generate: vocabulary levels do not match model n_q");
  require(vocab.size() == mc.vocab_size, "generate: vocabulary size does not match model");
  const auto spans = task::scan_spans(vocab, prefix.tokens, true);
  require(!prefix.complete() && spans.back().target && spans.back().begin == prefix.tokens.size(),
          "generate: prefix must end with the target's opening marker");
  task::TaskSequence seq = prefix;
  seq.spans = spans;
  const std::size_t limit = std::min(cfg.max_patches, mc.max_patches);
  task::PatchSequence ps = task::to_patches(vocab, seq, limit);

  const std::uint32_t audio_end = task::special::span_end(task::SpanKind::Audio);
  std::vector<std::vector<bool>> allowed(nq, std::vector<bool>(mc.vocab_size, false));
  for (std::size_t k = 0; k < nq; ++k)
    for (std::size_t c = 0; c < vocab.codebook_size(); ++c) allowed[k][vocab.audio_id(k, c)] = true;
  allowed[0][audio_end] = true;

  std::mt19937_64 rng(cfg.seed);
  nn::ParamBinding bind(model.params, false);
  GenerateResult res;
  std::vector<std::uint32_t> codes;
  res.status = GenStatus::LengthLimit;
  while (ps.size() < limit) {
    const nn::Var all_ctx = model::global_contexts(bind, mc, ps);
    const std::size_t last[] = {ps.size()};
    const nn::Var ctx = nn::gather_rows(all_ctx, last);
    std::vector<std::uint32_t> patch(nq, 0);
    bool stop = false;
    for (std::size_t k = 0; k < nq && !stop; ++k) {
      const nn::Var logits = model::local_forward(bind, mc, ctx, patch);
      const auto row = logits.value().row(k);
      const auto id = static_cast<std::uint32_t>(
          top_k_sample(row, std::min(cfg.k, mc.vocab_size), cfg.temperature, rng, cfg.constrain ? &allowed[k] : nullptr));
      if (k == 0 && id == audio_end) {
        ps.push_repeated(audio_end, true);
        res.status = GenStatus::Ended;
        stop = true;
      } else if (vocab.audio_level(id) != k) {
        res.status = GenStatus::Invalid;
        stop = true;
      } else {
        patch[k] = id;
      }
    }
    if (stop) break;
    ps.push_frame(patch, true);
    for (auto id : patch) codes.push_back(static_cast<std::uint32_t>(vocab.locate(id).local % vocab.codebook_size()));
  }
  res.grid = codec::unflatten(codes, nq);
  res.patches = ps.size();
  return res;
}

}  // namespace uniseq::inference
