#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "uniseq/nn/transformer.hpp"
#include "uniseq/task/patches.hpp"

namespace uniseq::model {

struct ModelConfig {
  std::size_t n_q = 3;
  nn::StackConfig global{4, 64, 4, 256};
  nn::StackConfig local{2, 64, 4, 256};
  std::size_t vocab_size = 0;
  std::size_t cont_dim = 16;
  std::size_t max_patches = task::kDefaultMaxPatches;
  double init_std = 0.02;

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(std::string_view text);
  bool operator==(const ModelConfig&) const = default;
};

enum class LossMode : std::uint8_t { All, TargetOnly };
std::string_view loss_mode_name(LossMode m);
LossMode loss_mode_from_name(std::string_view name);

}  // namespace uniseq::model
