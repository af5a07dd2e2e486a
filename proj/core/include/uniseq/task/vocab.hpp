#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uniseq::task {

inline constexpr std::size_t kSpecialCount = 128;

// Sub-sequence kinds that get their own start/end marker pair.
enum class SpanKind : std::uint8_t { Text, Phoneme, Semantic, Midi, Audio, Prompt };
inline constexpr std::array<SpanKind, 6> kSpanKinds{SpanKind::Text,  SpanKind::Phoneme, SpanKind::Semantic,
                                                    SpanKind::Midi,  SpanKind::Audio,   SpanKind::Prompt};
std::string_view span_kind_name(SpanKind k);
std::optional<SpanKind> span_kind_from_name(std::string_view name);
// Vocabulary range holding the span's tokens; empty for continuous text.
std::string_view span_modality(SpanKind k);

// Fixed special-token layout inside the first 128 ids.
namespace special {
inline constexpr std::uint32_t kStart = 0;
inline constexpr std::uint32_t kEnd = 1;
inline constexpr std::uint32_t kFirstTask = 2;     // 11 task identifiers
inline constexpr std::uint32_t kTaskCount = 11;
inline constexpr std::uint32_t kFirstMarker = 13;  // start/end pair per SpanKind
inline constexpr std::uint32_t kContinuous = 25;
inline constexpr std::uint32_t kEmpty = 26;
inline constexpr std::uint32_t kFirstReserved = 27;

inline constexpr std::uint32_t span_start(SpanKind k) { return kFirstMarker + 2 * static_cast<std::uint32_t>(k); }
inline constexpr std::uint32_t span_end(SpanKind k) { return span_start(k) + 1; }
}  // namespace special

// Canonical task names in task-token order.
inline constexpr std::array<std::string_view, special::kTaskCount> kTaskNames{
    "tts", "vc", "se", "tse", "svs", "sound", "music", "audio_edit", "sd", "itts", "speech_edit"};

struct RangeSpec {
  std::string name;
  std::size_t size = 0;    // ids per level
  std::size_t levels = 1;  // audio uses one sub-range per RVQ level
};

struct ModalityRange {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;  // per level
  std::size_t levels = 1;
  std::size_t total() const { return size * levels; }
};

// Joint vocabulary: contiguous modality ranges, special tokens first.
class Vocabulary {
 public:
  // First range must be "special" with 128 ids. Throws on duplicate names or
  // empty ranges.
  static Vocabulary build(std::span<const RangeSpec> spec);
  // special:128, audio:levels x codebook, semantic:500, phoneme:384, midi:128
  // (4212 ids at 3 x 1024).
  static Vocabulary standard(std::size_t levels = 3, std::size_t codebook = 1024);

  std::size_t size() const { return total_; }
  const std::vector<ModalityRange>& ranges() const { return ranges_; }
  bool has(std::string_view name) const;
  const ModalityRange& range(std::string_view name) const;

  std::uint32_t global_id(std::string_view modality, std::size_t local) const;
  std::uint32_t audio_id(std::size_t level, std::size_t code) const;
  std::size_t audio_levels() const;
  std::size_t codebook_size() const;

  struct Located {
    std::size_t range = 0;  // index into ranges()
    std::size_t local = 0;  // offset within the range (level * size + code for audio)
  };
  Located locate(std::uint32_t id) const;
  bool in_range(std::uint32_t id, std::string_view modality) const;
  // Level of an audio id, or nullopt for non-audio ids.
  std::optional<std::size_t> audio_level(std::uint32_t id) const;

  std::uint32_t task_token(std::string_view task) const;
  std::optional<std::string_view> task_of(std::uint32_t id) const;

  // "<start>", "<tts_task>", "<phoneme_start>", "audio:1:37", "phoneme:5" ...
  std::string token_name(std::uint32_t id) const;
  std::optional<std::uint32_t> parse_token_name(std::string_view name) const;

  std::vector<RangeSpec> spec() const;

 private:
  std::vector<ModalityRange> ranges_;
  std::vector<std::uint16_t> owner_;  // range index per id
  std::size_t total_ = 0;
};

std::string special_name(std::uint32_t id);

}  // namespace uniseq::task
