#include "uniseq/nn/checkpoint.hpp"

#include "uniseq/common/binary_io.hpp"
#include "uniseq/common/error.hpp"

namespace uniseq::nn {

namespace {
constexpr std::string_view kMagic = "UAW1";
constexpr std::uint32_t kMaxRank = 8;
}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParamSet& params) {
  io::ByteWriter w;
  w.magic(kMagic);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& name = params.name(i);
    const auto& t = params.at(i);
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) w.u64(e);
    for (double v : t.values()) w.f64(v);
  }
  return w.buffer();
}

ParamSet decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "checkpoint");
  r.expect_magic(kMagic);
  const std::uint32_t count = r.u32();
  ParamSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    std::string name = r.bytes(name_len);
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > kMaxRank)
      throw FormatError("checkpoint: entry '" + name + "' has invalid rank " + std::to_string(rank));
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (auto& e : shape) {
      e = static_cast<std::size_t>(r.u64());
      numel *= e;
    }
    if (numel * 8 > bytes.size())
      throw FormatError("checkpoint: entry '" + name + "' larger than file");
    std::vector<double> data(numel);
    for (double& v : data) v = r.f64();
    if (params.contains(name)) throw FormatError("checkpoint: duplicate entry '" + name + "'");
    params.add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  r.expect_end();
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  io::write_file(path, encode_checkpoint(params));
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return decode_checkpoint(bytes);
}

}  // namespace uniseq::nn
