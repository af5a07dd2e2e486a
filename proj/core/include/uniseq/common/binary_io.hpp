#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uniseq::io {

// Little-endian byte buffer writer.
class ByteWriter {
 public:
  void magic(std::string_view m);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::string_view s);

  const std::vector<std::uint8_t>& buffer() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

// Little-endian reader over a borrowed byte span. Throws FormatError on
// truncation, tagging messages with `what` and the byte offset.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  void expect_magic(std::string_view m);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }
  void expect_end();

 private:
  void need(std::size_t n);

  std::span<const std::uint8_t> data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);

}  // namespace uniseq::io
