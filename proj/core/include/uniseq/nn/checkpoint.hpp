#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "uniseq/nn/params.hpp"

namespace uniseq::nn {

// "UAW1" parameter checkpoint, all integers little-endian:
//   magic "UAW1"
//   u32 entry count
//   per entry: u32 name length, name bytes, u32 rank, rank x u64 extents,
//              product(extents) x f64
std::vector<std::uint8_t> encode_checkpoint(const ParamSet& params);
ParamSet decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace uniseq::nn
