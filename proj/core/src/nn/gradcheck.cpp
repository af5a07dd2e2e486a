#include "uniseq/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "uniseq/common/error.hpp"

namespace uniseq::nn {

namespace {

double eval(const Objective& f, const ParamSet& params) {
  ParamBinding bind(params, false);
  return f(bind).value()[0];
}

}  // namespace

GradCheckResult grad_check(const Objective& f, const ParamSet& params, double epsilon, double floor,
                           std::size_t stride) {
  require(epsilon >= 1e-7 && epsilon <= 1e-3, "grad_check: epsilon must lie in [1e-7, 1e-3]");
  require(stride >= 1, "grad_check: stride must be >= 1");

  ParamBinding bind(params, true);
  Var loss = f(bind);
  backward(loss);
  const std::vector<Tensor> analytic = bind.grads();
  for (const auto& g : analytic)
    if (!g.all_finite()) throw Error("grad_check: non-finite gradient");

  ParamSet work = params;
  GradCheckResult res;
  for (std::size_t i = 0; i < work.size(); ++i) {
    auto& vals = work.at(i).values();
    for (std::size_t j = 0; j < vals.size(); j += stride) {
      const double orig = vals[j];
      vals[j] = orig + epsilon;
      const double up = eval(f, work);
      vals[j] = orig - epsilon;
      const double down = eval(f, work);
      vals[j] = orig;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[i][j];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), floor});
      res.max_rel_error = std::max(res.max_rel_error, rel);
      res.max_abs_error = std::max(res.max_abs_error, abs_err);
      ++res.checked;
    }
  }
  return res;
}

}  // namespace uniseq::nn
