#include "uniseq/task/sequence.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "uniseq/common/error.hpp"

namespace uniseq::task {

DiscretePayload phoneme_payload(const modality::PhonemeSeq& p, DurationMode mode) {
  p.validate();
  require(mode != DurationMode::NotApplicable, "phoneme payload: duration mode required");
  if (mode == DurationMode::Kept) return {modality::expand_phoneme_durations(p)};
  return {p.symbols};
}

DiscretePayload midi_payload(const modality::MidiSeq& m) { return {modality::flatten_midi(m)}; }

namespace {

std::string slot_desc(const TaskTemplate& tmpl, std::size_t i) {
  return tmpl.task + " condition " + std::to_string(i) + " (" +
         std::string(span_kind_name(tmpl.conditions[i].kind)) + ")";
}

void append_grid(const Vocabulary& vocab, const codec::TokenGrid& g, std::vector<std::uint32_t>& out,
                 const std::string& what) {
  require(g.levels == vocab.audio_levels(), what + ": grid has " + std::to_string(g.levels) +
                                                " levels, vocabulary expects " +
                                                std::to_string(vocab.audio_levels()));
  require(g.frames() > 0, what + ": empty audio grid");
  g.validate(vocab.codebook_size());
  for (std::size_t t = 0; t < g.frames(); ++t)
    for (std::size_t k = 0; k < g.levels; ++k) out.push_back(vocab.audio_id(k, g.at(t, k)));
}

void append_span(const Vocabulary& vocab, const TaskTemplate& tmpl, std::size_t slot, const Payload& p,
                 TaskSequence& seq) {
  const Slot& s = tmpl.conditions[slot];
  const std::string what = slot_desc(tmpl, slot);
  seq.tokens.push_back(special::span_start(s.kind));
  SpanRecord rec{s.kind, seq.tokens.size(), 0, false};
  switch (s.kind) {
    case SpanKind::Text: {
      const auto* c = std::get_if<ContinuousPayload>(&p);
      require(c != nullptr, what + ": expected continuous payload");
      require(!c->vectors.empty(), what + ": empty payload");
      const std::size_t dim = c->vectors.front().size();
      for (const auto& v : c->vectors) {
        require(!v.empty() && v.size() == dim, what + ": continuous vectors must share a non-zero dimension");
        for (double x : v) require(std::isfinite(x), what + ": non-finite embedding value");
        seq.tokens.push_back(special::kContinuous);
        seq.continuous.push_back(v);
      }
      break;
    }
    case SpanKind::Audio:
    case SpanKind::Prompt: {
      const auto* g = std::get_if<codec::TokenGrid>(&p);
      require(g != nullptr, what + ": expected audio grid payload");
      append_grid(vocab, *g, seq.tokens, what);
      break;
    }
    default: {
      const auto* d = std::get_if<DiscretePayload>(&p);
      require(d != nullptr, what + ": expected discrete payload");
      require(!d->tokens.empty(), what + ": empty payload");
      const auto mod = span_modality(s.kind);
      for (auto t : d->tokens) seq.tokens.push_back(vocab.global_id(mod, t));
    }
  }
  rec.end = seq.tokens.size();
  seq.tokens.push_back(special::span_end(s.kind));
  seq.spans.push_back(rec);
}

TaskSequence serialize_conditions(const Vocabulary& vocab, const TaskTemplate& tmpl,
                                  std::span<const Payload> conditions) {
  tmpl.validate(vocab);
  require(conditions.size() == tmpl.conditions.size(),
          "serialize " + tmpl.task + ": expected " + std::to_string(tmpl.conditions.size()) +
              " condition payloads, got " + std::to_string(conditions.size()));
  TaskSequence seq;
  seq.tokens.push_back(special::kStart);
  seq.tokens.push_back(vocab.task_token(tmpl.task));
  for (std::size_t i = 0; i < conditions.size(); ++i) append_span(vocab, tmpl, i, conditions[i], seq);
  seq.tokens.push_back(special::span_start(SpanKind::Audio));
  return seq;
}

}  // namespace

TaskSequence serialize_task(const Vocabulary& vocab, const TaskTemplate& tmpl, std::span<const Payload> conditions,
                            const codec::TokenGrid& target) {
  TaskSequence seq = serialize_conditions(vocab, tmpl, conditions);
  SpanRecord rec{SpanKind::Audio, seq.tokens.size(), 0, true};
  append_grid(vocab, target, seq.tokens, "serialize " + tmpl.task + " target");
  rec.end = seq.tokens.size();
  seq.spans.push_back(rec);
  seq.tokens.push_back(special::span_end(SpanKind::Audio));
  seq.tokens.push_back(special::kEnd);
  return seq;
}

TaskSequence serialize_prefix(const Vocabulary& vocab, const TaskTemplate& tmpl, std::span<const Payload> conditions) {
  TaskSequence seq = serialize_conditions(vocab, tmpl, conditions);
  seq.spans.push_back({SpanKind::Audio, seq.tokens.size(), seq.tokens.size(), true});
  return seq;
}

std::vector<SpanRecord> scan_spans(const Vocabulary& vocab, std::span<const std::uint32_t> tokens, bool allow_open) {
  auto name = [&](std::uint32_t id) { return id < vocab.size() ? vocab.token_name(id) : std::to_string(id); };
  require(!tokens.empty() && tokens[0] == special::kStart, "sequence must begin with <start>");
  require(tokens.size() >= 2, "unterminated sequence");
  require(tokens[1] < vocab.size() && vocab.task_of(tokens[1]).has_value(),
          "unknown task token " + name(tokens[1]));
  const std::size_t nq = vocab.audio_levels();
  std::vector<SpanRecord> spans;
  std::size_t i = 2;
  while (true) {
    if (i == tokens.size()) fail("unterminated sequence");
    const std::uint32_t t = tokens[i];
    require(t < vocab.size(), "token id " + std::to_string(t) + " outside vocabulary at position " + std::to_string(i));
    if (t == special::kEnd) {
      require(i + 1 == tokens.size(), "tokens after <end> at position " + std::to_string(i + 1));
      break;
    }
    if (t < special::kFirstMarker || t >= special::kContinuous || (t - special::kFirstMarker) % 2 != 0)
      fail("unbalanced markers: " + name(t) + " outside any span at position " + std::to_string(i));
    const auto kind = static_cast<SpanKind>((t - special::kFirstMarker) / 2);
    SpanRecord rec{kind, i + 1, i + 1, false};
    if (allow_open && kind == SpanKind::Audio && i + 1 == tokens.size()) {
      rec.target = true;
      spans.push_back(rec);
      return spans;
    }
    const auto mod = span_modality(kind);
    std::size_t j = i + 1;
    for (; j < tokens.size(); ++j) {
      const std::uint32_t c = tokens[j];
      require(c < vocab.size(), "token id " + std::to_string(c) + " outside vocabulary at position " + std::to_string(j));
      if (c == special::span_end(kind)) break;
      const bool ok = kind == SpanKind::Text ? c == special::kContinuous : vocab.in_range(c, mod);
      if (!ok) {
        if (c < kSpecialCount && c != special::kContinuous) fail("unbalanced markers: " + name(c) + " inside " +
                                                                 std::string(span_kind_name(kind)) + " span");
        fail("token " + name(c) + " does not belong in a " + std::string(span_kind_name(kind)) + " span");
      }
      if (mod == "audio" && *vocab.audio_level(c) != (j - i - 1) % nq)
        fail("audio token " + name(c) + " at wrong level position in span starting at " + std::to_string(i));
    }
    if (j == tokens.size()) fail("unterminated sequence");
    rec.end = j;
    if (mod == "audio")
      require((rec.end - rec.begin) % nq == 0, "audio span length " + std::to_string(rec.end - rec.begin) +
                                                   " not divisible by n_q=" + std::to_string(nq));
    spans.push_back(rec);
    i = j + 1;
  }
  require(!spans.empty() && spans.back().kind == SpanKind::Audio, "sequence has no audio target span");
  spans.back().target = true;
  return spans;
}

namespace {

TaskExample parse_impl(const Vocabulary& vocab, const TemplateRegistry& registry, const TaskSequence& seq,
                       bool allow_open) {
  const auto spans = scan_spans(vocab, seq.tokens, allow_open);
  const std::string task{*vocab.task_of(seq.tokens[1])};
  const auto* tmpl = registry.find(task);
  require(tmpl != nullptr, "no template registered for task '" + task + "'");
  require(spans.size() == tmpl->conditions.size() + 1,
          task + ": expected " + std::to_string(tmpl->conditions.size() + 1) + " spans, found " +
              std::to_string(spans.size()));
  const std::size_t nq = vocab.audio_levels();
  auto grid_of = [&](const SpanRecord& s) {
    std::vector<std::uint32_t> codes;
    for (std::size_t i = s.begin; i < s.end; ++i) codes.push_back(vocab.locate(seq.tokens[i]).local % vocab.codebook_size());
    return codec::unflatten(codes, nq);
  };
  TaskExample ex;
  ex.task = task;
  std::size_t cont = 0;
  for (std::size_t i = 0; i < tmpl->conditions.size(); ++i) {
    const auto& s = spans[i];
    require(s.kind == tmpl->conditions[i].kind, task + ": span " + std::to_string(i) + " is " +
                                                    std::string(span_kind_name(s.kind)) + ", template expects " +
                                                    std::string(span_kind_name(tmpl->conditions[i].kind)));
    require(s.end > s.begin, task + ": empty " + std::string(span_kind_name(s.kind)) + " span");
    switch (s.kind) {
      case SpanKind::Text: {
        ContinuousPayload c;
        for (std::size_t t = s.begin; t < s.end; ++t) {
          require(cont < seq.continuous.size(), "continuous placeholder without a vector");
          c.vectors.push_back(seq.continuous[cont++]);
        }
        ex.conditions.emplace_back(std::move(c));
        break;
      }
      case SpanKind::Audio:
      case SpanKind::Prompt: ex.conditions.emplace_back(grid_of(s)); break;
      default: {
        DiscretePayload d;
        for (std::size_t t = s.begin; t < s.end; ++t) d.tokens.push_back(static_cast<std::uint32_t>(vocab.locate(seq.tokens[t]).local));
        ex.conditions.emplace_back(std::move(d));
      }
    }
  }
  require(cont == seq.continuous.size(), "more continuous vectors than placeholders");
  const auto& tgt = spans.back();
  if (tgt.end > tgt.begin) {
    ex.target = grid_of(tgt);
  } else {
    require(allow_open, task + ": empty target");
    ex.target = codec::TokenGrid(0, nq);
  }
  return ex;
}

}  // namespace

TaskExample parse_task(const Vocabulary& vocab, const TemplateRegistry& registry, const TaskSequence& seq) {
  return parse_impl(vocab, registry, seq, false);
}

TaskExample parse_prefix(const Vocabulary& vocab, const TemplateRegistry& registry, const TaskSequence& seq) {
  return parse_impl(vocab, registry, seq, true);
}

std::string dump_text(const Vocabulary& vocab, const TaskSequence& seq) {
  std::string out;
  std::size_t cont = 0;
  char buf[32];
  for (auto t : seq.tokens) {
    out += vocab.token_name(t);
    if (t == special::kContinuous) {
      require(cont < seq.continuous.size(), "dump: continuous placeholder without a vector");
      for (double x : seq.continuous[cont]) {
        std::snprintf(buf, sizeof buf, " %.17g", x);
        out += buf;
      }
      ++cont;
    }
    out += '\n';
  }
  return out;
}

TaskSequence load_text(const Vocabulary& vocab, std::string_view text) {
  TaskSequence seq;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    const auto id = vocab.parse_token_name(name);
    if (!id) throw FormatError("line " + std::to_string(lineno) + ": unknown token '" + name + "'");
    seq.tokens.push_back(*id);
    if (*id == special::kContinuous) {
      std::vector<double> v;
      std::string num;
      while (ls >> num) {
        try {
          std::size_t used = 0;
          v.push_back(std::stod(num, &used));
          if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
          throw FormatError("line " + std::to_string(lineno) + ": bad vector value '" + num + "'");
        }
      }
      if (v.empty()) throw FormatError("line " + std::to_string(lineno) + ": placeholder without a vector");
      seq.continuous.push_back(std::move(v));
    } else {
      std::string extra;
      if (ls >> extra) throw FormatError("line " + std::to_string(lineno) + ": trailing text after token");
    }
  }
  try {
    seq.spans = scan_spans(vocab, seq.tokens, true);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(e.what());
  }
  return seq;
}

}  // namespace uniseq::task
