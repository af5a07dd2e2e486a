#include "uniseq/task/templates.hpp"

#include <algorithm>
#include <json.hpp>

#include "uniseq/common/binary_io.hpp"
#include "uniseq/common/error.hpp"

namespace uniseq::task {

using nlohmann::json;

std::string_view duration_mode_name(DurationMode m) {
  switch (m) {
    case DurationMode::NotApplicable: return "n/a";
    case DurationMode::Kept: return "kept";
    case DurationMode::Removed: return "removed";
  }
  return "?";
}

void TaskTemplate::validate(const Vocabulary& vocab) const {
  require(std::find(kTaskNames.begin(), kTaskNames.end(), task) != kTaskNames.end(),
          "template: unknown task '" + task + "'");
  require(target.kind == SpanKind::Audio, "template " + task + ": target slot must be audio");
  for (const auto& s : conditions) {
    const bool phoneme = s.kind == SpanKind::Phoneme;
    require(phoneme == (s.durations != DurationMode::NotApplicable),
            "template " + task + ": duration mode applies to phoneme slots only");
    const auto mod = span_modality(s.kind);
    require(mod.empty() || vocab.has(mod),
            "template " + task + ": slot modality '" + std::string(mod) + "' missing from vocabulary");
  }
  require(vocab.has("audio"), "template " + task + ": vocabulary has no audio range");
}

namespace {

Slot phon(DurationMode m) { return {SpanKind::Phoneme, m}; }
Slot of(SpanKind k) { return {k, DurationMode::NotApplicable}; }

}  // namespace

TemplateRegistry TemplateRegistry::defaults() {
  using K = SpanKind;
  using D = DurationMode;
  TemplateRegistry r;
  r.templates_ = {
      {"tts", {phon(D::Removed), of(K::Prompt)}},
      {"vc", {of(K::Semantic), of(K::Prompt)}},
      {"se", {of(K::Audio)}},
      {"tse", {of(K::Audio), of(K::Prompt)}},
      {"svs", {phon(D::Kept), of(K::Midi), of(K::Prompt)}},
      {"sound", {of(K::Text)}},
      {"music", {of(K::Text)}},
      {"audio_edit", {of(K::Text), of(K::Audio)}},
      {"sd", {of(K::Audio)}},
      {"itts", {of(K::Text), phon(D::Removed)}},
      {"speech_edit", {phon(D::Kept), of(K::Audio)}},
  };
  return r;
}

TemplateRegistry TemplateRegistry::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("template registry: ") + e.what());
  }
  auto bad = [](const std::string& m) -> FormatError { return FormatError("template registry: " + m); };
  if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_array())
    throw bad("expected an object with a 'templates' array");
  TemplateRegistry r;
  for (const auto& t : doc["templates"]) {
    if (!t.is_object() || !t.contains("task") || !t["task"].is_string()) throw bad("template without 'task'");
    TaskTemplate tt;
    tt.task = t["task"].get<std::string>();
    for (auto it = t.begin(); it != t.end(); ++it)
      if (it.key() != "task" && it.key() != "conditions" && it.key() != "target")
        throw bad("unknown key '" + it.key() + "' in " + tt.task);
    if (!t.contains("conditions") || !t["conditions"].is_array()) throw bad(tt.task + ": missing 'conditions'");
    for (const auto& c : t["conditions"]) {
      std::string kind_name;
      std::string dur = "n/a";
      if (c.is_string()) {
        kind_name = c.get<std::string>();
      } else if (c.is_object() && c.contains("kind") && c["kind"].is_string()) {
        kind_name = c["kind"].get<std::string>();
        if (c.contains("durations")) {
          if (!c["durations"].is_string()) throw bad(tt.task + ": 'durations' must be a string");
          dur = c["durations"].get<std::string>();
        }
      } else {
        throw bad(tt.task + ": malformed condition slot");
      }
      const auto kind = span_kind_from_name(kind_name);
      if (!kind) throw bad(tt.task + ": unknown slot kind '" + kind_name + "'");
      Slot s{*kind, DurationMode::NotApplicable};
      if (dur == "kept") s.durations = DurationMode::Kept;
      else if (dur == "removed") s.durations = DurationMode::Removed;
      else if (dur != "n/a") throw bad(tt.task + ": unknown duration mode '" + dur + "'");
      if ((s.kind == SpanKind::Phoneme) != (s.durations != DurationMode::NotApplicable))
        throw bad(tt.task + ": phoneme slots, and only they, take 'durations'");
      tt.conditions.push_back(s);
    }
    const std::string target = t.value("target", std::string("audio"));
    if (target != "audio") throw bad(tt.task + ": target must be audio");
    if (r.find(tt.task)) throw bad("duplicate task '" + tt.task + "'");
    r.templates_.push_back(std::move(tt));
  }
  return r;
}

TemplateRegistry TemplateRegistry::load(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string TemplateRegistry::to_json() const {
  json arr = json::array();
  for (const auto& t : templates_) {
    json conds = json::array();
    for (const auto& s : t.conditions) {
      if (s.durations == DurationMode::NotApplicable)
        conds.push_back(std::string(span_kind_name(s.kind)));
      else
        conds.push_back({{"kind", std::string(span_kind_name(s.kind))},
                         {"durations", std::string(duration_mode_name(s.durations))}});
    }
    arr.push_back({{"task", t.task}, {"conditions", conds}, {"target", "audio"}});
  }
  return json{{"templates", arr}}.dump(2) + "\n";
}

const TaskTemplate* TemplateRegistry::find(std::string_view task) const {
  for (const auto& t : templates_)
    if (t.task == task) return &t;
  return nullptr;
}

const TaskTemplate& TemplateRegistry::get(std::string_view task) const {
  const auto* t = find(task);
  require(t != nullptr, "template registry: no template for task '" + std::string(task) + "'");
  return *t;
}

std::size_t TemplateRegistry::index_of(std::string_view task) const {
  for (std::size_t i = 0; i < templates_.size(); ++i)
    if (templates_[i].task == task) return i;
  fail("template registry: no template for task '" + std::string(task) + "'");
}

void TemplateRegistry::validate(const Vocabulary& vocab) const {
  for (const auto& t : templates_) t.validate(vocab);
}

}  // namespace uniseq::task
