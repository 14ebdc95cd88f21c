#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qlbart/errors.hpp"
#include "qlbart/family.hpp"

namespace qlbart {

// Covariates, outcomes and per-observation weights. Row-major storage;
// y has K columns (K = 1 except multinomial, where rows lie on the simplex
// and omega_i carries the multinomial count n_i).
struct Dataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k = 1;
  std::vector<double> x;       // n * p
  std::vector<double> y;       // n * k
  std::vector<double> weight;  // n
  std::vector<std::string> feature_names;

  double xval(std::size_t i, std::size_t j) const { return x[i * p + j]; }
  double yval(std::size_t i, std::size_t kk = 0) const { return y[i * k + kk]; }
  const double* row(std::size_t i) const { return x.data() + i * p; }

  void validate(const QuasiFamily& family) const {
    if (x.size() != n * p || y.size() != n * k || weight.size() != n)
      throw SchemaError("Dataset: inconsistent array sizes");
    if (family.kind == Family::multinomial && static_cast<int>(k) != family.dim)
      throw SchemaError("Dataset: outcome dimension does not match family K");
    if (family.kind != Family::multinomial && k != 1)
      throw SchemaError("Dataset: scalar family expects one outcome column");
    for (double v : x)
      if (!std::isfinite(v)) throw SchemaError("Dataset: non-finite covariate");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(weight[i] > 0.0) || !std::isfinite(weight[i]))
        throw SchemaError("Dataset: weights must be positive and finite (row " +
                          std::to_string(i) + ")");
      if (family.kind == Family::multinomial) {
        double total = 0.0;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double v = yval(i, kk);
          if (!std::isfinite(v) || v < 0.0)
            throw SchemaError("Dataset: multinomial outcomes must be >= 0 (row " +
                              std::to_string(i) + ")");
          total += v;
        }
        if (std::abs(total - 1.0) > 1e-10)
          throw SchemaError("Dataset: multinomial row off the simplex (row " +
                            std::to_string(i) + ")");
      } else {
        const double v = yval(i);
        if (!std::isfinite(v)) throw SchemaError("Dataset: non-finite outcome");
        if (family.kind == Family::binomial && (v < 0.0 || v > 1.0))
          throw SchemaError("Dataset: binomial outcome outside [0,1] (row " +
                            std::to_string(i) + ")");
      }
    }
  }
};

}  // namespace qlbart
