#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uniseq::modality {

struct PhonemeSeq {
  std::vector<std::uint32_t> symbols;
  std::optional<std::vector<std::uint32_t>> durations;  // frames per symbol, each >= 1

  void validate() const;
  bool operator==(const PhonemeSeq&) const = default;
};

struct MidiNote {
  std::uint32_t f0 = 0;
  std::uint32_t duration = 1;  // frames
  bool operator==(const MidiNote&) const = default;
};
using MidiSeq = std::vector<MidiNote>;

// Frame-level symbol sequence: each symbol repeated by its duration.
std::vector<std::uint32_t> expand_phoneme_durations(const PhonemeSeq& p);
PhonemeSeq strip_durations(const PhonemeSeq& p);
std::vector<std::uint32_t> flatten_midi(const MidiSeq& m);

// Nearest centroid per frame (ties to the lowest index). `features` is
// frames x dim, `centroids` is C x dim, both row-major.
std::vector<std::uint32_t> semantic_tokenize(std::span<const double> features, std::span<const double> centroids,
                                             std::size_t dim);
// K-means centroids for semantic_tokenize (default 500 clusters).
std::vector<double> fit_semantic_centroids(std::span<const double> features, std::size_t dim,
                                           std::size_t clusters = 500, std::size_t iters = 20,
                                           std::uint64_t seed = 0);

// Seeded hash embedding standing in for a pretrained text encoder: one
// unit-norm dim-sized vector per word; equal words map to equal vectors.
std::vector<std::vector<double>> embed_text(std::span<const std::string> words, std::size_t dim,
                                            std::uint64_t seed);

// "SYMBOL DURATION" / "F0 DURATION" per line, ASCII integers. Blank lines
// and lines starting with '#' are skipped.
PhonemeSeq parse_phoneme_file(std::istream& in, const std::string& source = "<input>");
MidiSeq parse_midi_file(std::istream& in, const std::string& source = "<input>");
PhonemeSeq read_phoneme_file(const std::filesystem::path& path);
MidiSeq read_midi_file(const std::filesystem::path& path);

}  // namespace uniseq::modality
