#include "uniseq/modality/tokenizers.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "uniseq/codec/kmeans.hpp"
#include "uniseq/common/error.hpp"

namespace uniseq::modality {

void PhonemeSeq::validate() const {
  if (!durations) return;
  require(durations->size() == symbols.size(), "phonemes: " + std::to_string(durations->size()) +
                                                   " durations for " + std::to_string(symbols.size()) +
                                                   " symbols");
  for (std::size_t i = 0; i < durations->size(); ++i)
    require((*durations)[i] >= 1, "phonemes: duration of symbol " + std::to_string(i) + " is zero");
}

std::vector<std::uint32_t> expand_phoneme_durations(const PhonemeSeq& p) {
  require(p.durations.has_value(), "expand_phoneme_durations: sequence has no durations");
  p.validate();
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < p.symbols.size(); ++i) out.insert(out.end(), (*p.durations)[i], p.symbols[i]);
  return out;
}

PhonemeSeq strip_durations(const PhonemeSeq& p) { return PhonemeSeq{p.symbols, std::nullopt}; }

std::vector<std::uint32_t> flatten_midi(const MidiSeq& m) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    require(m[i].duration >= 1, "flatten_midi: note " + std::to_string(i) + " has zero duration");
    out.insert(out.end(), m[i].duration, m[i].f0);
  }
  return out;
}

std::vector<std::uint32_t> semantic_tokenize(std::span<const double> features, std::span<const double> centroids,
                                             std::size_t dim) {
  require(dim >= 1, "semantic_tokenize: dim must be >= 1");
  require(features.size() % dim == 0, "semantic_tokenize: feature buffer is not a multiple of dim " +
                                          std::to_string(dim));
  require(!centroids.empty() && centroids.size() % dim == 0,
          "semantic_tokenize: centroid dim does not match feature dim " + std::to_string(dim));
  std::vector<std::uint32_t> out(features.size() / dim);
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = codec::nearest_centroid(features.subspan(t * dim, dim), centroids, dim);
  return out;
}

std::vector<double> fit_semantic_centroids(std::span<const double> features, std::size_t dim, std::size_t clusters,
                                           std::size_t iters, std::uint64_t seed) {
  return codec::kmeans(features, dim, {clusters, iters, seed, false}).centroids;
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<std::vector<double>> embed_text(std::span<const std::string> words, std::size_t dim,
                                            std::uint64_t seed) {
  require(dim >= 1, "embed_text: dim must be >= 1");
  std::vector<std::vector<double>> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    require(!w.empty(), "embed_text: empty word");
    std::mt19937_64 rng(fnv1a(w, seed));
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : v) {
        x = dist(rng);
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

std::vector<std::pair<std::uint32_t, std::uint32_t>> parse_pairs(std::istream& in, const std::string& source) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a)) continue;
    if (a[0] == '#') continue;
    auto where = source + ":" + std::to_string(lineno);
    if (!(ss >> b) || (ss >> extra)) throw FormatError(where + ": expected two integers");
    auto parse = [&](const std::string& s) {
      std::uint32_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw FormatError(where + ": not an integer: '" + s + "'");
      return v;
    };
    const auto x = parse(a);
    const auto d = parse(b);
    if (d == 0) throw FormatError(where + ": duration must be >= 1");
    out.emplace_back(x, d);
  }
  return out;
}

}  // namespace

PhonemeSeq parse_phoneme_file(std::istream& in, const std::string& source) {
  PhonemeSeq p;
  p.durations.emplace();
  for (auto [sym, dur] : parse_pairs(in, source)) {
    p.symbols.push_back(sym);
    p.durations->push_back(dur);
  }
  return p;
}

MidiSeq parse_midi_file(std::istream& in, const std::string& source) {
  MidiSeq m;
  for (auto [f0, dur] : parse_pairs(in, source)) m.push_back({f0, dur});
  return m;
}

PhonemeSeq read_phoneme_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_phoneme_file(in, path.string());
}

MidiSeq read_midi_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_midi_file(in, path.string());
}

}  // namespace uniseq::modality
