#pragma once

// Half-Cauchy update of the leaf scale sigma_lambda by slice sampling on
// log sigma. Conjugate families put a zero-mean log-gamma prior on the leaf
// values; the quasi-power model uses a Normal(0, sigma^2) leaf prior, so
// both likelihood shapes are supported.

#include <cmath>
#include <vector>

#include "qlbart/family.hpp"
#include "qlbart/rng.hpp"
#include "qlbart/slice.hpp"

namespace qlbart {

enum class LeafPriorKind { log_gamma, normal };

namespace detail {

inline double log_half_cauchy(double sigma, double scale) {
  const double z = sigma / scale;
  return -std::log1p(z * z) - std::log(scale);
}

}  // namespace detail

// One draw of sigma_lambda given the current leaf values. Empty input means
// no likelihood term, in which case the half-Cauchy prior is sampled exactly.
inline double sample_sigma_lambda(const std::vector<double>& leaf_values, double scale,
                                  LeafPriorKind kind, double sigma_current, Rng& rng) {
  if (leaf_values.empty()) return rng.half_cauchy(scale);

  const double n = static_cast<double>(leaf_values.size());
  double sum = 0.0, sum_exp = 0.0, sum_sq = 0.0;
  for (double v : leaf_values) {
    sum += v;
    sum_exp += std::exp(v);
    sum_sq += v * v;
  }

  const auto log_target = [&](double x) {
    const double sigma = std::exp(x);
    double ll;
    if (kind == LeafPriorKind::log_gamma) {
      const double a = trigamma_inverse(sigma * sigma);
      const double log_b = digamma(a);
      ll = n * (a * log_b - log_gamma(a)) + a * sum - std::exp(log_b) * sum_exp;
    } else {
      ll = -n * x - 0.5 * sum_sq / (sigma * sigma);
    }
    return ll + detail::log_half_cauchy(sigma, scale) + x;  // + Jacobian of log transform
  };

  const double x1 = slice_sample_1d(log_target, std::log(sigma_current), 1.0, 50, rng);
  return std::exp(x1);
}

}  // namespace qlbart
