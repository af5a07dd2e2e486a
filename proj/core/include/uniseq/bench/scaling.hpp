#pragma once

#include <span>

namespace uniseq::bench {

// Least-squares slope of log(y) against log(x). Needs >= 3 distinct x
// values; a constant y series has slope 0.
double fit_scaling_exponent(std::span<const double> x, std::span<const double> y);

}  // namespace uniseq::bench
