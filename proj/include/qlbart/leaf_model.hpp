#pragma once

// Leaf sufficient statistics and integrated likelihoods for the Bayesian
// backfitting samplers. The quasi-binomial, quasi-Poisson, quasi-gamma and
// quasi-multinomial models are conjugate under the log-gamma leaf prior:
// each leaf (and category) contributes
//   log int exp(alpha lambda - beta e^lambda) dLogGam(lambda; a, b)
//     = a log b - lgamma(a) + lgamma(a + alpha) - (a + alpha) log(b + beta).
// The quasi-power model is handled by a Laplace approximation about
// lambda_hat = log(A/B) with curvature I = A e^{lambda_hat (1-kappa)} / phi,
// refined by one slice-sampling pass when leaves are drawn.

#include <cmath>
#include <cstddef>
#include <vector>

#include "qlbart/data.hpp"
#include "qlbart/family.hpp"
#include "qlbart/rng.hpp"
#include "qlbart/slice.hpp"
#include "qlbart/tree.hpp"

namespace qlbart {

// Per-leaf sums. For conjugate families `shape` and `rate` hold the
// increments (alpha, beta) above, one entry per outcome category; for the
// quasi-power model they hold (A, B) unscaled by phi.
struct LeafStats {
  int n_leaf = 0;
  std::vector<double> shape;
  std::vector<double> rate;
};

inline std::vector<int> assign_leaves(const DecisionTree& tree, const Dataset& data) {
  std::vector<int> leaf_of(data.n);
  for (std::size_t i = 0; i < data.n; ++i) leaf_of[i] = tree.leaf_for(data.row(i));
  return leaf_of;
}

// zeta is the N x K fit of all other trees. xi must be non-null for the
// multinomial and is ignored otherwise.
inline std::vector<LeafStats> leaf_stats(const QuasiFamily& family, const DecisionTree& tree,
                                         const Dataset& data, const std::vector<double>& zeta,
                                         double phi, double kappa,
                                         const std::vector<double>* xi,
                                         const std::vector<int>& leaf_of) {
  const std::size_t k = data.k;
  std::vector<LeafStats> stats(tree.nodes().size());
  for (std::size_t id = 0; id < stats.size(); ++id) {
    if (tree.nodes()[id].is_leaf()) {
      stats[id].shape.assign(k, 0.0);
      stats[id].rate.assign(k, 0.0);
    }
  }
  for (std::size_t i = 0; i < data.n; ++i) {
    LeafStats& s = stats[static_cast<std::size_t>(leaf_of[i])];
    s.n_leaf += 1;
    const double w = data.weight[i];
    switch (family.kind) {
      case Family::poisson:
        s.shape[0] += w * data.yval(i) / phi;
        s.rate[0] += w * std::exp(zeta[i]) / phi;
        break;
      case Family::gamma:
        s.shape[0] += w / phi;
        s.rate[0] += w * data.yval(i) * std::exp(zeta[i]) / phi;
        break;
      case Family::power:
        s.shape[0] += w * data.yval(i) * std::exp(zeta[i] * (1.0 - kappa));
        s.rate[0] += w * std::exp(zeta[i] * (2.0 - kappa));
        break;
      case Family::multinomial:
        for (std::size_t c = 0; c < k; ++c) {
          s.shape[c] += w * data.yval(i, c) / phi;
          s.rate[c] += (*xi)[i] * std::exp(zeta[i * k + c]);
        }
        break;
      case Family::binomial:
        // the backfitting sampler runs quasi-binomial as a K=2 multinomial
        throw std::domain_error("leaf_stats: expand binomial data to K=2 multinomial first");
    }
  }
  return stats;
}

namespace detail {

inline double conjugate_leaf_marginal(double a, double b, double alpha, double beta) {
  return a * std::log(b) - log_gamma(a) + log_gamma(a + alpha) -
         (a + alpha) * std::log(b + beta);
}

// Lambda_l(lambda) = (1/phi) [A e^{lambda(1-kappa)}/(1-kappa) - B e^{lambda(2-kappa)}/(2-kappa)]
inline double power_leaf_loglik(double lambda, double A, double B, double kappa, double phi) {
  return (A * std::exp(lambda * (1.0 - kappa)) / (1.0 - kappa) -
          B * std::exp(lambda * (2.0 - kappa)) / (2.0 - kappa)) /
         phi;
}

}  // namespace detail

// Log marginal likelihood of one leaf (summed over categories).
// For the quasi-power model a leaf with A <= 0 or B <= 0 has no interior
// mode; it contributes the prior-only marginal (0) and is counted by the
// caller as a fallback leaf.
inline double integrated_log_lik(const QuasiFamily& family, const LeafStats& stats,
                                 const LeafPrior& prior, double phi,
                                 int* fallback_count = nullptr) {
  if (family.kind == Family::power) {
    const double A = stats.shape[0], B = stats.rate[0];
    if (stats.n_leaf == 0) return 0.0;
    if (!(A > 0.0) || !(B > 0.0)) {
      if (fallback_count) ++*fallback_count;
      return 0.0;
    }
    const double kappa = family.kappa;
    const double lambda_hat = std::log(A / B);
    const double info = A * std::exp(lambda_hat * (1.0 - kappa)) / phi;
    const double inv_info = 1.0 / info;
    const double s2 = prior.sigma_lambda * prior.sigma_lambda;
    return detail::power_leaf_loglik(lambda_hat, A, B, kappa, phi) +
           0.5 * std::log(inv_info / (s2 + inv_info)) -
           0.5 * lambda_hat * lambda_hat / (inv_info + s2);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < stats.shape.size(); ++c)
    total += detail::conjugate_leaf_marginal(prior.a, prior.b, stats.shape[c], stats.rate[c]);
  return total;
}

// Integrated likelihood of a whole tree given per-node stats.
inline double tree_integrated_log_lik(const QuasiFamily& family, const DecisionTree& tree,
                                      const std::vector<LeafStats>& stats,
                                      const LeafPrior& prior, double phi,
                                      int* fallback_count = nullptr) {
  double total = 0.0;
  for (std::size_t id = 0; id < tree.nodes().size(); ++id)
    if (tree.nodes()[id].is_leaf())
      total += integrated_log_lik(family, stats[id], prior, phi, fallback_count);
  return total;
}

// Draws every leaf value of `tree` from its full conditional. Conjugate
// families sample lambda = log G, G ~ Gam(a + alpha, b + beta) exactly; the
// quasi-power model draws from the Laplace normal and applies one slice
// pass targeting the exact conditional.
inline void sample_leaves(const QuasiFamily& family, DecisionTree& tree,
                          const std::vector<LeafStats>& stats, const LeafPrior& prior,
                          double phi, Rng& rng) {
  const double s2 = prior.sigma_lambda * prior.sigma_lambda;
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    TreeNode& node = tree.nodes()[id];
    if (!node.is_leaf()) continue;
    const LeafStats& s = stats[id];
    if (family.kind == Family::power) {
      const double A = s.shape[0], B = s.rate[0];
      if (!(A > 0.0) || !(B > 0.0)) {
        node.leaf[0] = rng.normal(0.0, prior.sigma_lambda);
        continue;
      }
      const double kappa = family.kappa;
      const double lambda_hat = std::log(A / B);
      const double info = A * std::exp(lambda_hat * (1.0 - kappa)) / phi;
      const double v = 1.0 / (info + 1.0 / s2);
      const double m = info * lambda_hat * v;
      const double draw = rng.normal(m, std::sqrt(v));
      const auto log_target = [&](double lambda) {
        return detail::power_leaf_loglik(lambda, A, B, kappa, phi) -
               0.5 * lambda * lambda / s2;
      };
      node.leaf[0] = slice_sample_1d(log_target, draw, std::sqrt(v), 50, rng);
    } else {
      for (std::size_t c = 0; c < node.leaf.size(); ++c)
        node.leaf[c] = rng.log_gamma_draw(prior.a + s.shape[c], prior.b + s.rate[c]);
    }
  }
}

}  // namespace qlbart
