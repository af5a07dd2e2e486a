#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uniseq/task/vocab.hpp"

namespace uniseq::task {

// How phoneme conditions carry timing: frame-level (symbols repeated by
// duration) or symbol-level.
enum class DurationMode : std::uint8_t { NotApplicable, Kept, Removed };
std::string_view duration_mode_name(DurationMode m);

struct Slot {
  SpanKind kind = SpanKind::Audio;
  DurationMode durations = DurationMode::NotApplicable;
  bool operator==(const Slot&) const = default;
};

struct TaskTemplate {
  std::string task;  // also names the task token
  std::vector<Slot> conditions;
  Slot target{SpanKind::Audio, DurationMode::NotApplicable};

  // Target must be audio; phoneme slots need a duration mode; every slot's
  // range must exist in `vocab`.
  void validate(const Vocabulary& vocab) const;
  bool operator==(const TaskTemplate&) const = default;
};

class TemplateRegistry {
 public:
  // The shipped 11-task registry.
  static TemplateRegistry defaults();
  static TemplateRegistry from_json(std::string_view text);
  static TemplateRegistry load(const std::filesystem::path& path);
  std::string to_json() const;

  const std::vector<TaskTemplate>& all() const { return templates_; }
  const TaskTemplate& get(std::string_view task) const;
  const TaskTemplate* find(std::string_view task) const;
  std::size_t index_of(std::string_view task) const;
  void validate(const Vocabulary& vocab) const;

 private:
  std::vector<TaskTemplate> templates_;
};

}  // namespace uniseq::task
