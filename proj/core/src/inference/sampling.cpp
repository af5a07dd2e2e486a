#include "uniseq/inference/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uniseq/common/error.hpp"

namespace uniseq::inference {

void SamplingConfig::validate() const {
  require(k >= 1, "sampling: k must be >= 1");
  require(std::isfinite(temperature) && temperature > 0, "sampling: temperature must be > 0");
  require(max_patches >= 1, "sampling: max_patches must be >= 1");
}

std::vector<double> top_k_probs(std::span<const double> logits, std::size_t k, double temperature,
                                const std::vector<bool>* allowed) {
  const std::size_t V = logits.size();
  require(V >= 1, "top_k: empty logits");
  require(k >= 1 && k <= V, "top_k: k=" + std::to_string(k) + " must be in [1, " + std::to_string(V) + "]");
  require(std::isfinite(temperature) && temperature > 0, "top_k: temperature must be > 0");
  for (double x : logits) require(std::isfinite(x), "top_k: non-finite logits");
  require(allowed == nullptr || allowed->size() == V, "top_k: allowed mask size mismatch");

  std::vector<std::size_t> idx;
  idx.reserve(V);
  for (std::size_t i = 0; i < V; ++i)
    if (!allowed || (*allowed)[i]) idx.push_back(i);
  require(!idx.empty(), "top_k: no allowed tokens");
  const std::size_t kk = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                    [&](std::size_t a, std::size_t b) { return logits[a] > logits[b] || (logits[a] == logits[b] && a < b); });
  idx.resize(kk);

  std::vector<double> p(V, 0.0);
  const double mx = logits[idx.front()] / temperature;
  double sum = 0;
  for (auto i : idx) {
    p[i] = std::exp(logits[i] / temperature - mx);
    sum += p[i];
  }
  for (auto i : idx) p[i] /= sum;
  return p;
}

std::size_t top_k_sample(std::span<const double> logits, std::size_t k, double temperature, std::mt19937_64& rng,
                         const std::vector<bool>* allowed) {
  const auto p = top_k_probs(logits, k, temperature, allowed);
  const double u = std::generate_canonical<double, 53>(rng);
  double acc = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    last = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last;  // rounding left u just above the final cumulative sum
}

}  // namespace uniseq::inference
