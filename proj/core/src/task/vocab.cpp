#include "uniseq/task/vocab.hpp"

#include <charconv>

#include "uniseq/common/error.hpp"

namespace uniseq::task {

std::string_view span_kind_name(SpanKind k) {
  switch (k) {
    case SpanKind::Text: return "text";
    case SpanKind::Phoneme: return "phoneme";
    case SpanKind::Semantic: return "semantic";
    case SpanKind::Midi: return "midi";
    case SpanKind::Audio: return "audio";
    case SpanKind::Prompt: return "prompt";
  }
  return "?";
}

std::optional<SpanKind> span_kind_from_name(std::string_view name) {
  for (auto k : kSpanKinds)
    if (span_kind_name(k) == name) return k;
  return std::nullopt;
}

std::string_view span_modality(SpanKind k) {
  switch (k) {
    case SpanKind::Text: return "";
    case SpanKind::Phoneme: return "phoneme";
    case SpanKind::Semantic: return "semantic";
    case SpanKind::Midi: return "midi";
    case SpanKind::Audio:
    case SpanKind::Prompt: return "audio";
  }
  return "";
}

std::string special_name(std::uint32_t id) {
  if (id == special::kStart) return "<start>";
  if (id == special::kEnd) return "<end>";
  if (id >= special::kFirstTask && id < special::kFirstTask + special::kTaskCount)
    return "<" + std::string(kTaskNames[id - special::kFirstTask]) + "_task>";
  if (id >= special::kFirstMarker && id < special::kContinuous) {
    const auto kind = static_cast<SpanKind>((id - special::kFirstMarker) / 2);
    const bool is_end = (id - special::kFirstMarker) % 2 == 1;
    return "<" + std::string(span_kind_name(kind)) + (is_end ? "_end>" : "_start>");
  }
  if (id == special::kContinuous) return "<continuous_token>";
  if (id == special::kEmpty) return "<empty>";
  return "<reserved_" + std::to_string(id) + ">";
}

Vocabulary Vocabulary::build(std::span<const RangeSpec> spec) {
  require(!spec.empty(), "vocab: empty range spec");
  require(spec.front().name == "special" && spec.front().size == kSpecialCount && spec.front().levels == 1,
          "vocab: first range must be special:128");
  Vocabulary v;
  for (const auto& r : spec) {
    require(!r.name.empty(), "vocab: range with empty name");
    require(r.size >= 1 && r.levels >= 1, "vocab: range '" + r.name + "' has zero size");
    require(!v.has(r.name), "vocab: duplicate range name '" + r.name + "'");
    v.ranges_.push_back({r.name, v.total_, r.size, r.levels});
    v.total_ += r.size * r.levels;
  }
  require(v.ranges_.size() < 65536, "vocab: too many ranges");
  v.owner_.resize(v.total_);
  for (std::size_t i = 0; i < v.ranges_.size(); ++i) {
    const auto& r = v.ranges_[i];
    std::fill_n(v.owner_.begin() + static_cast<std::ptrdiff_t>(r.offset), r.total(), static_cast<std::uint16_t>(i));
  }
  return v;
}

Vocabulary Vocabulary::standard(std::size_t levels, std::size_t codebook) {
  const RangeSpec spec[] = {{"special", kSpecialCount, 1}, {"audio", codebook, levels}, {"semantic", 500, 1},
                            {"phoneme", 384, 1},           {"midi", 128, 1}};
  return build(spec);
}

bool Vocabulary::has(std::string_view name) const {
  for (const auto& r : ranges_)
    if (r.name == name) return true;
  return false;
}

const ModalityRange& Vocabulary::range(std::string_view name) const {
  for (const auto& r : ranges_)
    if (r.name == name) return r;
  fail("vocab: no range named '" + std::string(name) + "'");
}

std::uint32_t Vocabulary::global_id(std::string_view modality, std::size_t local) const {
  const auto& r = range(modality);
  require(local < r.total(), "vocab: local id " + std::to_string(local) + " outside " + r.name + " range of " +
                                 std::to_string(r.total()));
  return static_cast<std::uint32_t>(r.offset + local);
}

std::uint32_t Vocabulary::audio_id(std::size_t level, std::size_t code) const {
  const auto& r = range("audio");
  require(level < r.levels, "vocab: audio level " + std::to_string(level) + " >= " + std::to_string(r.levels));
  require(code < r.size, "vocab: audio code " + std::to_string(code) + " >= codebook size " + std::to_string(r.size));
  return static_cast<std::uint32_t>(r.offset + level * r.size + code);
}

std::size_t Vocabulary::audio_levels() const { return range("audio").levels; }
std::size_t Vocabulary::codebook_size() const { return range("audio").size; }

Vocabulary::Located Vocabulary::locate(std::uint32_t id) const {
  require(id < total_, "vocab: id " + std::to_string(id) + " outside vocabulary of " + std::to_string(total_));
  const std::size_t r = owner_[id];
  return {r, id - ranges_[r].offset};
}

bool Vocabulary::in_range(std::uint32_t id, std::string_view modality) const {
  if (id >= total_) return false;
  return ranges_[owner_[id]].name == modality;
}

std::optional<std::size_t> Vocabulary::audio_level(std::uint32_t id) const {
  if (!in_range(id, "audio")) return std::nullopt;
  const auto& r = ranges_[owner_[id]];
  return (id - r.offset) / r.size;
}

std::uint32_t Vocabulary::task_token(std::string_view task) const {
  for (std::uint32_t i = 0; i < special::kTaskCount; ++i)
    if (kTaskNames[i] == task) return special::kFirstTask + i;
  fail("vocab: unknown task '" + std::string(task) + "'");
}

std::optional<std::string_view> Vocabulary::task_of(std::uint32_t id) const {
  if (id >= special::kFirstTask && id < special::kFirstTask + special::kTaskCount)
    return kTaskNames[id - special::kFirstTask];
  return std::nullopt;
}

std::string Vocabulary::token_name(std::uint32_t id) const {
  const auto loc = locate(id);
  const auto& r = ranges_[loc.range];
  if (loc.range == 0) return special_name(id);
  if (r.levels > 1)
    return r.name + ":" + std::to_string(loc.local / r.size) + ":" + std::to_string(loc.local % r.size);
  return r.name + ":" + std::to_string(loc.local);
}

std::optional<std::uint32_t> Vocabulary::parse_token_name(std::string_view name) const {
  if (name.starts_with("<")) {
    for (std::uint32_t i = 0; i < kSpecialCount; ++i)
      if (special_name(i) == name) return i;
    return std::nullopt;
  }
  const auto colon = name.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const std::string_view mod = name.substr(0, colon);
  if (!has(mod)) return std::nullopt;
  const auto& r = range(mod);
  auto parse = [](std::string_view s) -> std::optional<std::size_t> {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
  };
  std::string_view rest = name.substr(colon + 1);
  std::size_t local = 0;
  if (r.levels > 1) {
    const auto c2 = rest.find(':');
    if (c2 == std::string_view::npos) return std::nullopt;
    auto lvl = parse(rest.substr(0, c2));
    auto code = parse(rest.substr(c2 + 1));
    if (!lvl || !code || *lvl >= r.levels || *code >= r.size) return std::nullopt;
    local = *lvl * r.size + *code;
  } else {
    auto v = parse(rest);
    if (!v || *v >= r.size) return std::nullopt;
    local = *v;
  }
  return static_cast<std::uint32_t>(r.offset + local);
}

std::vector<RangeSpec> Vocabulary::spec() const {
  std::vector<RangeSpec> out;
  for (const auto& r : ranges_) out.push_back({r.name, r.size, r.levels});
  return out;
}

}  // namespace uniseq::task
