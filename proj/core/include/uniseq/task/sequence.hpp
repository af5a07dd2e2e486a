#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uniseq/codec/rvq.hpp"
#include "uniseq/modality/tokenizers.hpp"
#include "uniseq/task/templates.hpp"
#include "uniseq/task/vocab.hpp"

namespace uniseq::task {

// Modality-local ids (phoneme, semantic, midi).
struct DiscretePayload {
  std::vector<std::uint32_t> tokens;
  bool operator==(const DiscretePayload&) const = default;
};
// One vector per <continuous_token> placeholder.
struct ContinuousPayload {
  std::vector<std::vector<double>> vectors;
  bool operator==(const ContinuousPayload&) const = default;
};
using Payload = std::variant<DiscretePayload, codec::TokenGrid, ContinuousPayload>;

DiscretePayload phoneme_payload(const modality::PhonemeSeq& p, DurationMode mode);
DiscretePayload midi_payload(const modality::MidiSeq& m);

// Content of one marker-delimited span: tokens [begin, end), markers excluded.
struct SpanRecord {
  SpanKind kind = SpanKind::Audio;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool target = false;
  bool operator==(const SpanRecord&) const = default;
};

struct TaskSequence {
  std::vector<std::uint32_t> tokens;
  std::vector<SpanRecord> spans;
  std::vector<std::vector<double>> continuous;  // in placeholder order

  // True when the sequence ends with <end>; generation prompts stop right
  // after the target's <audio_start>.
  bool complete() const { return !tokens.empty() && tokens.back() == special::kEnd; }
  bool operator==(const TaskSequence&) const = default;
};

struct TaskExample {
  std::string task;
  std::vector<Payload> conditions;
  codec::TokenGrid target;
  bool operator==(const TaskExample&) const = default;
};

TaskSequence serialize_task(const Vocabulary& vocab, const TaskTemplate& tmpl, std::span<const Payload> conditions,
                            const codec::TokenGrid& target);
// Conditions followed by the opening target marker.
TaskSequence serialize_prefix(const Vocabulary& vocab, const TaskTemplate& tmpl, std::span<const Payload> conditions);

// Template-free structural scan: marker balance, content ranges, audio level
// pattern. With allow_open, a trailing <audio_start> yields an empty open
// target span instead of an "unterminated sequence" error.
std::vector<SpanRecord> scan_spans(const Vocabulary& vocab, std::span<const std::uint32_t> tokens,
                                   bool allow_open = false);

TaskExample parse_task(const Vocabulary& vocab, const TemplateRegistry& registry, const TaskSequence& seq);
// Accepts complete sequences and generation prompts; the target grid of a
// prompt is empty.
TaskExample parse_prefix(const Vocabulary& vocab, const TemplateRegistry& registry, const TaskSequence& seq);

// One token name per line; placeholders carry their vector inline.
std::string dump_text(const Vocabulary& vocab, const TaskSequence& seq);
TaskSequence load_text(const Vocabulary& vocab, std::string_view text);

}  // namespace uniseq::task
