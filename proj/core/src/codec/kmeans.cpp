#include "uniseq/codec/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "uniseq/common/error.hpp"

namespace uniseq::codec {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double d = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

}  // namespace

std::uint32_t nearest_centroid(std::span<const double> x, std::span<const double> centroids, std::size_t dim) {
  const std::size_t k = centroids.size() / dim;
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = sq_dist(x.data(), centroids.data() + c * dim, dim);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

KMeansResult kmeans(std::span<const double> points, std::size_t dim, const KMeansOptions& opt) {
  require(dim >= 1 && points.size() % dim == 0, "kmeans: point buffer is not a multiple of dim");
  const std::size_t n = points.size() / dim;
  const std::size_t k = opt.clusters;
  require(k >= 1, "kmeans: need at least one cluster");
  require(n >= k, "kmeans: " + std::to_string(n) + " points cannot fill " + std::to_string(k) + " clusters");
  require(opt.iters >= 1, "kmeans: iters must be >= 1");

  std::mt19937_64 rng(opt.seed);
  KMeansResult res;
  res.dim = dim;
  res.centroids.assign(k * dim, 0.0);
  auto point = [&](std::size_t i) { return points.data() + i * dim; };

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = 0;
  if (opt.pin_zero) {
    const std::vector<double> origin(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(point(i), origin.data(), dim);
    first = 1;
  }
  for (std::size_t c = first; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += std::isinf(v) ? 0.0 : v;
    std::size_t pick = 0;
    if (c == 0 || total <= 0.0) {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    } else {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (u < d2[i]) {
          pick = i;
          break;
        }
        u -= d2[i];
      }
      while (d2[pick] <= 0.0 && pick > 0) --pick;
    }
    std::copy_n(point(pick), dim, res.centroids.data() + c * dim);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(point(i), point(pick), dim));
  }

  res.assignment.assign(n, 0);
  std::vector<double> dist(n);
  auto assign = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res.assignment[i] = nearest_centroid({point(i), dim}, res.centroids, dim);
      dist[i] = sq_dist(point(i), res.centroids.data() + res.assignment[i] * dim, dim);
      total += dist[i];
    }
    res.mse_history.push_back(total / static_cast<double>(n));
  };

  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  std::vector<bool> reseeded(n);
  for (std::size_t it = 0; it < opt.iters; ++it) {
    assign();
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = res.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += point(i)[j];
    }
    std::fill(reseeded.begin(), reseeded.end(), false);
    for (std::size_t c = 0; c < k; ++c) {
      if (opt.pin_zero && c == 0) continue;
      double* cent = res.centroids.data() + c * dim;
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) cent[j] = sums[c * dim + j] / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the worst-served point not already used.
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (!reseeded[i] && (far == n || dist[i] > dist[far])) far = i;
      reseeded[far] = true;
      std::copy_n(point(far), dim, cent);
    }
  }
  assign();
  return res;
}

}  // namespace uniseq::codec
