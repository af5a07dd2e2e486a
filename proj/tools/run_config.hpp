#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uniseq/bench/benchmark.hpp"
#include "uniseq/bench/multitask.hpp"
#include "uniseq/codec/transform.hpp"
#include "uniseq/inference/sampling.hpp"
#include "uniseq/model/config.hpp"

namespace uniseq::cli {

struct VocabSection {
  std::size_t semantic = 500;
  std::size_t phoneme = 384;
  std::size_t midi = 128;
};

struct BenchSection {
  bench::BenchScale scale;
  std::vector<std::string> archs{"flatten", "coarse", "parallel", "delay", "multiscale"};
  std::vector<std::size_t> T{64, 128, 256};
  std::vector<std::size_t> n_q{3, 8};
};

struct RunConfig {
  codec::CodecConfig codec;
  std::size_t codec_iters = 20;
  std::string books;  // codebook file used by codec-encode/decode and generate --wav
  VocabSection vocab;
  model::ModelConfig model;  // vocab_size and n_q are filled from the vocabulary
  bench::TrainLoopConfig train;
  bench::SyntheticTaskSpec task;  // synthetic corpus used by train/multitask
  double alpha = 0.05;
  inference::SamplingConfig sample;
  BenchSection bench;
};

// Every section and key is optional; unknown keys raise FormatError.
RunConfig parse_run_config(std::string_view json_text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// "section.key  default  description" lines for --help.
std::string config_reference();

}  // namespace uniseq::cli
