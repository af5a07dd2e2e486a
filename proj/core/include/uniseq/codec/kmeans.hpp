#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace uniseq::codec {

struct KMeansOptions {
  std::size_t clusters = 2;
  std::size_t iters = 20;
  std::uint64_t seed = 0;
  // Centroid 0 stays fixed at the origin.
  bool pin_zero = false;
};

struct KMeansResult {
  std::size_t dim = 0;
  std::vector<double> centroids;           // clusters x dim
  std::vector<std::uint32_t> assignment;   // nearest centroid per point
  std::vector<double> mse_history;         // mean squared distance after each assignment pass
};

// Index of the nearest centroid by squared L2 distance; ties go to the
// lowest index.
std::uint32_t nearest_centroid(std::span<const double> x, std::span<const double> centroids, std::size_t dim);

// Lloyd iterations from a seeded k-means++ start. An empty cluster is
// re-seeded at the point farthest from its current centroid. The returned
// centroids are the result of the final update step and `assignment` is the
// nearest-centroid assignment against them.
KMeansResult kmeans(std::span<const double> points, std::size_t dim, const KMeansOptions& opt);

}  // namespace uniseq::codec
