#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "uniseq/bench/synthetic.hpp"
#include "uniseq/model/multiscale.hpp"
#include "uniseq/nn/optim.hpp"
#include "uniseq/task/templates.hpp"

namespace uniseq::bench {

struct TrainLoopConfig {
  std::size_t steps = 3000;
  std::size_t batch = 16;
  nn::AdamConfig adam{2e-3, 200, 0.9, 0.98, 1e-9, 1.0};
  model::LossMode mode = model::LossMode::All;
  std::size_t patch_budget = 4096;
  // Every check_every steps the teacher-forced target accuracy on a probe of
  // training examples is measured; training stops once every task reaches
  // stop_accuracy. 0 disables the check.
  std::size_t check_every = 100;
  std::size_t probe = 64;
  double stop_accuracy = 0.999;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::size_t steps = 0;
  std::vector<double> losses;  // per step
  std::vector<double> probe_accuracy;
};

using StepCallback = std::function<void(std::size_t step, double loss)>;

// Trains on a mixture of tasks; each batch element picks its task from
// `weights` (resample_weights output).
TrainReport train_mixture(model::MultiScaleModel& model, const task::Vocabulary& vocab,
                          const task::TemplateRegistry& registry,
                          const std::vector<std::span<const task::TaskExample>>& tasks,
                          const std::vector<double>& weights, const TrainLoopConfig& cfg,
                          const StepCallback& on_step = {});

// Fraction of target positions (frames and the closing marker) whose
// argmax under teacher forcing equals the reference.
double teacher_forced_accuracy(const model::MultiScaleModel& model, std::span<const task::PatchSequence> batch);

// Greedy generation per example; fraction of target tokens reproduced
// exactly at their (frame, level) position. Missing or extra frames count
// as errors against the reference length.
double exact_match_accuracy(const model::MultiScaleModel& model, const task::Vocabulary& vocab,
                            const task::TemplateRegistry& registry, std::span<const task::TaskExample> examples);

struct StudyConfig {
  std::vector<SyntheticTaskSpec> tasks;
  model::ModelConfig model;  // vocab_size is taken from the task vocabulary
  TrainLoopConfig loop;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

struct TaskResult {
  std::string task;
  double single_accuracy = 0.0;
  double joint_accuracy = 0.0;
  std::size_t single_steps = 0;
};

struct StudyResult {
  std::vector<TaskResult> tasks;
  std::vector<double> weights;
  std::size_t joint_steps = 0;
};

// One joint model over all tasks and one model per task, equal step budget.
// Throws when the tasks do not share one vocabulary.
StudyResult run_multitask_study(const StudyConfig& cfg, const std::function<void(const std::string&)>& log = {});

}  // namespace uniseq::bench
