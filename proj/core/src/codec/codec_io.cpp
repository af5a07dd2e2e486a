#include "uniseq/codec/codec_io.hpp"

#include <cmath>

#include "uniseq/common/binary_io.hpp"
#include "uniseq/common/error.hpp"

namespace uniseq::codec {

std::vector<std::uint8_t> encode_grid(const TokenGrid& grid) {
  io::ByteWriter w;
  w.magic("UAG1");
  w.u32(static_cast<std::uint32_t>(grid.levels));
  w.u32(static_cast<std::uint32_t>(grid.frames()));
  for (auto c : grid.codes) w.u32(c);
  return w.buffer();
}

TokenGrid decode_grid(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "token grid");
  r.expect_magic("UAG1");
  const std::uint32_t levels = r.u32();
  const std::uint32_t frames = r.u32();
  if (levels == 0) throw FormatError("token grid: n_q is zero");
  const std::uint64_t count = static_cast<std::uint64_t>(levels) * frames;
  if (count * 4 != bytes.size() - r.offset())
    throw FormatError("token grid: header declares " + std::to_string(count) + " codes but payload has " +
                      std::to_string(bytes.size() - r.offset()) + " bytes");
  TokenGrid g(frames, levels);
  for (auto& c : g.codes) c = r.u32();
  r.expect_end();
  return g;
}

void save_grid(const std::filesystem::path& path, const TokenGrid& grid) { io::write_file(path, encode_grid(grid)); }

TokenGrid load_grid(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return decode_grid(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_codebooks(const CodebookSet& books) {
  books.validate();
  io::ByteWriter w;
  w.magic("UAC1");
  w.u32(static_cast<std::uint32_t>(books.levels));
  w.u32(static_cast<std::uint32_t>(books.size));
  w.u32(static_cast<std::uint32_t>(books.dim));
  for (double v : books.data) w.f64(v);
  return w.buffer();
}

CodebookSet decode_codebooks(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "codebooks");
  r.expect_magic("UAC1");
  const std::uint32_t levels = r.u32();
  const std::uint32_t size = r.u32();
  const std::uint32_t dim = r.u32();
  if (levels == 0 || size == 0 || dim == 0) throw FormatError("codebooks: zero dimension in header");
  const std::uint64_t count = static_cast<std::uint64_t>(levels) * size * dim;
  if (count * 8 != bytes.size() - r.offset())
    throw FormatError("codebooks: header declares " + std::to_string(count) + " values but payload has " +
                      std::to_string(bytes.size() - r.offset()) + " bytes");
  CodebookSet books(levels, size, dim);
  for (double& v : books.data) {
    v = r.f64();
    if (!std::isfinite(v)) throw FormatError("codebooks: non-finite value at byte " + std::to_string(r.offset() - 8));
  }
  r.expect_end();
  return books;
}

void save_codebooks(const std::filesystem::path& path, const CodebookSet& books) {
  io::write_file(path, encode_codebooks(books));
}

CodebookSet load_codebooks(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return decode_codebooks(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace uniseq::codec
