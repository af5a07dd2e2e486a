#include "uniseq/task/resample.hpp"

#include <cmath>

#include "uniseq/common/error.hpp"

namespace uniseq::task {

void ResamplingConfig::validate() const {
  require(!counts.empty(), "resampling: no tasks");
  for (double c : counts) require(std::isfinite(c) && c > 0, "resampling: counts must be > 0");
  require(std::isfinite(alpha) && alpha >= 0, "resampling: alpha must be >= 0");
}

std::vector<double> resample_weights(const ResamplingConfig& cfg) {
  cfg.validate();
  // normalized in log space so large counts with large alpha stay finite
  double max_log = -INFINITY;
  for (double c : cfg.counts) max_log = std::max(max_log, cfg.alpha * std::log(c));
  std::vector<double> w;
  double sum = 0;
  for (double c : cfg.counts) {
    w.push_back(std::exp(cfg.alpha * std::log(c) - max_log));
    sum += w.back();
  }
  for (double& x : w) x /= sum;
  return w;
}

std::size_t sample_task(std::span<const double> weights, std::mt19937_64& rng) {
  require(!weights.empty(), "sample_task: no weights");
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

}  // namespace uniseq::task
