#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "uniseq/bench/synthetic.hpp"
#include "uniseq/codec/audio.hpp"
#include "uniseq/codec/codec_io.hpp"
#include "uniseq/codec/kmeans.hpp"
#include "uniseq/codec/rvq.hpp"
#include "uniseq/codec/transform.hpp"
#include "uniseq/common/error.hpp"

using namespace uniseq;
using namespace uniseq::codec;

namespace {

AudioSignal random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  AudioSignal s;
  s.samples.resize(n);
  for (auto& v : s.samples) v = d(rng);
  return s;
}

// Level-1 {(0,0),(1,0)}, level-2 {(0,0),(0,0.5)}.
CodebookSet toy_books() {
  CodebookSet b(2, 2, 2);
  b.data = {0, 0, 1, 0, 0, 0, 0, 0.5};
  return b;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Independent greedy residual quantizer: exhaustive scan per level.
std::vector<std::uint32_t> oracle_encode(std::span<const double> h, const CodebookSet& books) {
  std::vector<double> r(h.begin(), h.end());
  std::vector<std::uint32_t> codes;
  for (std::size_t k = 0; k < books.levels; ++k) {
    std::uint32_t best = 0;
    double best_d = INFINITY;
    for (std::size_t m = 0; m < books.size; ++m) {
      const double d = sq_dist(r, books.vector(k, m));
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::uint32_t>(m);
      }
    }
    codes.push_back(best);
    auto q = books.vector(k, best);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= q[j];
  }
  return codes;
}

}  // namespace

TEST_CASE("token rate arithmetic") {
  CodecConfig cfg;
  CHECK(cfg.frames_per_second() == 50.0);
  CHECK(cfg.tokens_per_second() == 150.0);
  cfg.levels = 8;
  CHECK(cfg.tokens_per_second() == 400.0);
}

TEST_CASE("config validation") {
  CodecConfig cfg;
  cfg.latent_dim = 400;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = CodecConfig{};
  cfg.codebook_size = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("analyze frame counts and linearity") {
  CodecConfig cfg;
  CHECK(analyze(random_signal(16000, 1), cfg).frames() == 50);
  CHECK(analyze(random_signal(639, 1), cfg).frames() == 1);
  CHECK_THROWS_AS(analyze(random_signal(319, 1), cfg), Error);
  AudioSignal zero;
  zero.samples.assign(960, 0.0);
  const auto f = analyze(zero, cfg);
  for (double v : f.data) CHECK(v == 0.0);
  for (double v : synthesize(f, cfg).samples) CHECK(v == 0.0);
}

TEST_CASE("analysis basis is orthonormal") {
  CodecConfig cfg;
  cfg.hop = 24;
  cfg.latent_dim = 16;
  FramingTransform tr(cfg);
  const auto& b = tr.basis();
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      double dot = 0.0;
      for (std::size_t s = 0; s < 24; ++s) dot += b[i * 24 + s] * b[j * 24 + s];
      CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("analyze then synthesize reconstructs with L = S") {
  CodecConfig cfg;
  const auto sig = random_signal(50 * cfg.hop + 17, 7);
  const auto rec = synthesize(analyze(sig, cfg), cfg);
  REQUIRE(rec.samples.size() == 50 * cfg.hop);
  double err = 0.0;
  for (std::size_t i = 0; i < rec.samples.size(); ++i) err = std::max(err, std::abs(rec.samples[i] - sig.samples[i]));
  CHECK(err < 1e-9);
}

TEST_CASE("rvq on the two-level toy books") {
  const auto books = toy_books();
  LatentFrames h(1, 2);
  h.data = {0.9, 0.4};
  std::vector<std::uint32_t> codes(2);
  std::vector<double> norms(2);
  rvq_encode_frame(h.frame(0), books, codes, norms);
  CHECK(codes == std::vector<std::uint32_t>{1, 1});
  CHECK(norms[1] == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
  CHECK(norms[1] == doctest::Approx(0.1414).epsilon(1e-3));
  CHECK(codes == oracle_encode(h.frame(0), books));
  const auto dec = rvq_decode(rvq_encode(h, books), books);
  CHECK(dec.data == std::vector<double>{1.0, 0.5});
}

TEST_CASE("exact codebook vectors decode exactly with zero deeper levels") {
  const auto books = toy_books();
  LatentFrames h(1, 2);
  h.data = {1.0, 0.0};
  const auto grid = rvq_encode(h, books);
  CHECK(grid.codes == std::vector<std::uint32_t>{1, 0});
  CHECK(rvq_decode(grid, books) == h);
}

TEST_CASE("equidistant candidates pick the lowest index") {
  CodebookSet b(1, 3, 1);
  b.data = {-1.0, 1.0, 1.0};
  LatentFrames h(1, 1);
  h.data = {0.0};
  CHECK(rvq_encode(h, b).codes[0] == 0);
  h.data = {1.0};
  CHECK(rvq_encode(h, b).codes[0] == 1);
  std::vector<double> c{0, 0, 10, 0};
  CHECK(nearest_centroid(std::vector<double>{5, 3}, c, 2) == 0);
}

TEST_CASE("decode is additive across levels") {
  std::mt19937_64 rng(3);
  CodebookSet b(3, 4, 5);
  std::normal_distribution<double> d;
  for (auto& v : b.data) v = d(rng);
  TokenGrid g(6, 3);
  for (auto& c : g.codes) c = static_cast<std::uint32_t>(rng() % 4);
  const auto full = rvq_decode(g, b);
  // Replace the deeper levels' vectors with zeros to isolate the first level.
  CodebookSet first = b, rest = b;
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t k = 1; k < 3; ++k)
      for (auto& v : first.vector(k, m)) v = 0.0;
    for (auto& v : rest.vector(0, m)) v = 0.0;
  }
  const auto a = rvq_decode(g, first), r = rvq_decode(g, rest);
  for (std::size_t i = 0; i < full.data.size(); ++i)
    CHECK(full.data[i] == doctest::Approx(a.data[i] + r.data[i]).epsilon(1e-12));
}

TEST_CASE("encode and decode errors") {
  const auto books = toy_books();
  LatentFrames h(1, 3);
  CHECK_THROWS_AS(rvq_encode(h, books), Error);
  TokenGrid g(1, 2);
  g.codes = {0, 2};
  CHECK_THROWS_AS(rvq_decode(g, books), Error);
}

TEST_CASE("flatten and unflatten") {
  TokenGrid g(2, 3);
  g.codes = {1, 2, 3, 4, 5, 6};
  CHECK(flatten(g) == std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6});
  CHECK(unflatten(flatten(g), 3) == g);
  std::vector<std::uint32_t> seven(7, 0);
  CHECK_THROWS_AS(unflatten(seven, 3), Error);
  CodecConfig cfg;
  TokenGrid second(static_cast<std::size_t>(cfg.frames_per_second()), cfg.levels);
  CHECK(flatten(second).size() == 150);
}

TEST_CASE("trained codebooks against an exhaustive oracle") {
  const auto frames = bench::gaussian_mixture_frames(512, 6, 8, 5);
  CodecConfig cfg;
  cfg.hop = 6;
  cfg.latent_dim = 6;
  cfg.codebook_size = 16;
  cfg.levels = 3;
  const auto t1 = train_codebooks_detailed(std::span(&frames, 1), cfg, 10, 9);
  const auto t2 = train_codebooks_detailed(std::span(&frames, 1), cfg, 10, 9);
  CHECK(t1.books == t2.books);
  for (const auto& hist : t1.mse_history)
    for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1] + 1e-12);

  const auto grid = rvq_encode(frames, t1.books);
  std::vector<std::uint32_t> codes(3);
  std::vector<double> norms(3);
  for (std::size_t t = 0; t < frames.frames(); ++t) {
    CHECK(std::vector<std::uint32_t>(grid.codes.begin() + t * 3, grid.codes.begin() + t * 3 + 3) ==
          oracle_encode(frames.frame(t), t1.books));
    rvq_encode_frame(frames.frame(t), t1.books, codes, norms);
    CHECK(norms[1] <= norms[0]);
    CHECK(norms[2] <= norms[1]);
  }
  CHECK(quantization_mse(frames, t1.books) <= quantization_mse(frames, t1.books.truncated(1)));
}

TEST_CASE("k-means fixed point on exactly V distinct frames") {
  LatentFrames f(8, 2);
  for (std::size_t i = 0; i < 8; ++i) {
    f.data[2 * i] = static_cast<double>(i);
    f.data[2 * i + 1] = static_cast<double>(i * i) * 0.1;
  }
  CodecConfig cfg;
  cfg.hop = 2;
  cfg.latent_dim = 2;
  cfg.levels = 1;
  cfg.codebook_size = 8;
  const auto books = train_codebooks(std::span(&f, 1), cfg, 5, 1);
  CHECK(quantization_mse(f, books) == 0.0);
  cfg.codebook_size = 9;
  CHECK_THROWS_AS(train_codebooks(std::span(&f, 1), cfg, 5, 1), Error);
}

TEST_CASE("k-means reseeds empty clusters") {
  // Three distinct points, three clusters, all duplicates stacked on one
  // point: every centroid must end on a distinct point.
  std::vector<double> pts{0, 0, 0, 0, 0, 0, 5, 5, -5, 5};
  KMeansOptions opt{3, 10, 4, false};
  const auto r = kmeans(pts, 2, opt);
  CHECK(r.mse_history.back() == 0.0);
}

TEST_CASE("grid and codebook files") {
  TokenGrid g(3, 2);
  g.codes = {1, 2, 3, 4, 5, 6};
  const auto bytes = encode_grid(g);
  CHECK(bytes.size() == 12 + 24);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "UAG1");
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 1);
  CHECK(decode_grid(bytes) == g);
  auto bad = bytes;
  bad[3] = '2';
  CHECK_THROWS_AS(decode_grid(bad), FormatError);
  const auto books = toy_books();
  const auto bb = encode_codebooks(books);
  CHECK(bb.size() == 16 + 8 * 8);
  CHECK(decode_codebooks(bb) == books);
  std::vector<std::uint8_t> cut(bb.begin(), bb.end() - 1);
  CHECK_THROWS_AS(decode_codebooks(cut), FormatError);
}

TEST_CASE("wav round trip and rejection") {
  AudioSignal s = random_signal(1000, 2);
  s.sample_rate = 8000;
  const auto bytes = encode_wav(s);
  const auto back = decode_wav(bytes);
  CHECK(back.sample_rate == 8000);
  REQUIRE(back.samples.size() == 1000);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(std::abs(back.samples[i] - s.samples[i]) <= 1.0 / 32767.0);
  CHECK(encode_wav(back) == bytes);

  auto stereo = bytes;
  stereo[22] = 2;  // channel count
  CHECK_THROWS_WITH_AS(decode_wav(stereo), doctest::Contains("channels"), FormatError);
  auto bits = bytes;
  bits[34] = 8;
  CHECK_THROWS_WITH_AS(decode_wav(bits), doctest::Contains("bits"), FormatError);
  std::vector<std::uint8_t> junk{'R', 'I', 'F', 'X'};
  CHECK_THROWS_AS(decode_wav(junk), FormatError);
  AudioSignal loud;
  loud.samples = {1.5};
  CHECK_THROWS_AS(loud.validate(), Error);
}
