#pragma once

// Univariate slice sampler with step-out (Neal 2003). Used for the
// sigma_lambda hyperparameter and to refine quasi-power leaf draws.

#include <cmath>
#include <functional>

#include "qlbart/rng.hpp"

namespace qlbart {

template <class LogDensity>
inline double slice_sample_1d(const LogDensity& log_density, double x0, double width,
                              int max_stepout, Rng& rng) {
  const double log_y = log_density(x0) - rng.exponential(1.0);
  double lo = x0 - width * rng.uniform();
  double hi = lo + width;
  // randomly split the step-out budget between the two sides
  int budget_lo = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_stepout) + 1));
  int budget_hi = max_stepout - budget_lo;
  while (budget_lo-- > 0 && log_density(lo) > log_y) lo -= width;
  while (budget_hi-- > 0 && log_density(hi) > log_y) hi += width;
  for (int iter = 0; iter < 1000; ++iter) {
    const double x = lo + (hi - lo) * rng.uniform();
    if (log_density(x) > log_y) return x;
    if (x < x0) lo = x; else hi = x;
  }
  return x0;  // shrinkage exhausted; keep the current point
}

}  // namespace qlbart
