#include "uniseq/bench/scaling.hpp"

#include <cmath>
#include <set>

#include "uniseq/common/error.hpp"

namespace uniseq::bench {

double fit_scaling_exponent(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "fit_scaling_exponent: x and y lengths differ");
  std::set<double> distinct(x.begin(), x.end());
  require(distinct.size() >= 3, "fit_scaling_exponent: need at least 3 distinct x values");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, "fit_scaling_exponent: values must be positive");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx, dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  return sxy / sxx;
}

}  // namespace uniseq::bench
