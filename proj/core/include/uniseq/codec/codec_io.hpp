#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "uniseq/codec/rvq.hpp"

namespace uniseq::codec {

// "UAG1", u32 n_q, u32 T, then T*n_q u32 codes frame-major (all little-endian).
std::vector<std::uint8_t> encode_grid(const TokenGrid& grid);
TokenGrid decode_grid(std::span<const std::uint8_t> bytes);
void save_grid(const std::filesystem::path& path, const TokenGrid& grid);
TokenGrid load_grid(const std::filesystem::path& path);

// "UAC1", u32 n_q, u32 V, u32 L, then n_q*V*L f64 (all little-endian).
std::vector<std::uint8_t> encode_codebooks(const CodebookSet& books);
CodebookSet decode_codebooks(std::span<const std::uint8_t> bytes);
void save_codebooks(const std::filesystem::path& path, const CodebookSet& books);
CodebookSet load_codebooks(const std::filesystem::path& path);

}  // namespace uniseq::codec
