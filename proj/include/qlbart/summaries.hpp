#pragma once

// Posterior summarization: inclusion probabilities, variable importance,
// least-squares projection summaries with summary R^2, credible intervals
// (equal-tail and HPD), and the chain diagnostics used by the fit report.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "qlbart/draws.hpp"
#include "qlbart/errors.hpp"

namespace qlbart {

// Fraction of retained iterations in which each variable is used by at
// least one splitting rule.
inline std::vector<double> inclusion_probabilities(const Draws& draws) {
  if (draws.split_counts.empty()) throw ConfigError("inclusion_probabilities: empty draws");
  const std::size_t p = draws.split_counts.front().size();
  std::vector<double> out(p, 0.0);
  for (const std::vector<int>& counts : draws.split_counts)
    for (std::size_t j = 0; j < p; ++j)
      if (counts[j] >= 1) out[j] += 1.0;
  for (double& v : out) v /= static_cast<double>(draws.split_counts.size());
  return out;
}

// Posterior mean number of splitting rules using each variable.
inline std::vector<double> variable_importance(const Draws& draws) {
  if (draws.split_counts.empty()) throw ConfigError("variable_importance: empty draws");
  const std::size_t p = draws.split_counts.front().size();
  std::vector<double> out(p, 0.0);
  for (const std::vector<int>& counts : draws.split_counts)
    for (std::size_t j = 0; j < p; ++j) out[j] += counts[j];
  for (double& v : out) v /= static_cast<double>(draws.split_counts.size());
  return out;
}

struct ProjectionSummary {
  std::vector<Eigen::VectorXd> coefficients;  // one per retained draw
  std::vector<double> r_squared;
};

// Per-draw least squares of the fitted r(X_i) values onto a summary basis,
// with R^2 = 1 - SSR/SST.
inline ProjectionSummary projection_summary(const std::vector<std::vector<double>>& r_draws,
                                            const Eigen::MatrixXd& basis) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  if (qr.rank() < basis.cols()) throw SchemaError("projection_summary: rank-deficient basis");
  ProjectionSummary out;
  for (const std::vector<double>& draw : r_draws) {
    if (static_cast<Eigen::Index>(draw.size()) != basis.rows())
      throw SchemaError("projection_summary: draw length does not match basis rows");
    const Eigen::Map<const Eigen::VectorXd> r(draw.data(), basis.rows());
    const Eigen::VectorXd coef = qr.solve(r);
    const Eigen::VectorXd resid = r - basis * coef;
    const double mean = r.mean();
    const double sst = (r.array() - mean).square().sum();
    const double ssr = resid.squaredNorm();
    out.coefficients.push_back(coef);
    out.r_squared.push_back(sst > 0.0 ? 1.0 - ssr / sst : 0.0);
  }
  return out;
}

// Linear basis: intercept plus every feature column.
inline Eigen::MatrixXd build_linear_basis(const std::vector<double>& x, std::size_t n,
                                          std::size_t p) {
  Eigen::MatrixXd basis(n, p + 1);
  for (std::size_t i = 0; i < n; ++i) {
    basis(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j)
      basis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = x[i * p + j];
  }
  return basis;
}

// Additive piecewise-linear basis: intercept, each feature, and hinge terms
// (x_j - knot)_+ with knots at the interior deciles of each feature.
inline Eigen::MatrixXd build_hinge_basis(const std::vector<double>& x, std::size_t n,
                                         std::size_t p, int knots_per_feature = 9) {
  std::vector<std::vector<double>> knots(p);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = x[i * p + j];
    std::sort(column.begin(), column.end());
    for (int q = 1; q <= knots_per_feature; ++q) {
      const double v = column[static_cast<std::size_t>(
          (static_cast<double>(q) / (knots_per_feature + 1)) * (n - 1))];
      if (knots[j].empty() || v > knots[j].back()) knots[j].push_back(v);
    }
  }
  std::size_t total = 1 + p;
  for (std::size_t j = 0; j < p; ++j) total += knots[j].size();
  Eigen::MatrixXd basis(n, total);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    basis(static_cast<Eigen::Index>(i), col++) = 1.0;
    for (std::size_t j = 0; j < p; ++j)
      basis(static_cast<Eigen::Index>(i), col++) = x[i * p + j];
    for (std::size_t j = 0; j < p; ++j)
      for (double knot : knots[j])
        basis(static_cast<Eigen::Index>(i), col++) = std::max(0.0, x[i * p + j] - knot);
  }
  return basis;
}

struct CredibleInterval {
  double equal_tail_lo = 0.0;
  double equal_tail_hi = 0.0;
  double hpd_lo = 0.0;
  double hpd_hi = 0.0;
};

// Equal-tail interval from order statistics and HPD as the shortest window
// of ceil(level * n) consecutive sorted draws. The order-statistic quantile
// (no interpolation) guarantees hpd width <= equal-tail width.
inline CredibleInterval credible_intervals(std::vector<double> draws, double level) {
  if (draws.size() < 2) throw ConfigError("credible_intervals: need at least 2 draws");
  if (!(level > 0.0) || !(level < 1.0))
    throw ConfigError("credible_intervals: level must lie in (0,1)");
  std::sort(draws.begin(), draws.end());
  const std::size_t n = draws.size();
  const double alpha = 1.0 - level;

  CredibleInterval out;
  const std::size_t lo_rank =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n * alpha / 2.0)));
  const std::size_t hi_rank =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(n * (1.0 - alpha / 2.0))));
  out.equal_tail_lo = draws[lo_rank - 1];
  out.equal_tail_hi = draws[hi_rank - 1];

  const std::size_t m = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(level * static_cast<double>(n))));
  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + m <= n; ++i) {
    const double width = draws[i + m - 1] - draws[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  out.hpd_lo = draws[best];
  out.hpd_hi = draws[best + m - 1];
  return out;
}

// Effective sample size by Geyer's initial positive sequence.
inline double effective_sample_size(const std::vector<double>& chain) {
  const std::size_t n = chain.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : chain) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : chain) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) return static_cast<double>(n);

  const auto autocov = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (chain[i] - mean) * (chain[i + lag] - mean);
    return c / static_cast<double>(n);
  };

  double sum = 0.0;
  for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
    const double pair = autocov(lag) + autocov(lag + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double ess = static_cast<double>(n) / (1.0 + 2.0 * sum / var);
  return std::min(ess, static_cast<double>(n));
}

// Split-chain Gelman-Rubin potential scale reduction factor.
inline double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const std::vector<double>& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half < 2) continue;
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    halves.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(half),
                        c.begin() + static_cast<std::ptrdiff_t>(2 * half));
  }
  if (halves.size() < 2) return 1.0;
  const std::size_t m = halves.size(), len = halves.front().size();
  std::vector<double> means(m);
  double grand = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (double v : halves[j]) s += v;
    means[j] = s / static_cast<double>(len);
    grand += means[j];
  }
  grand /= static_cast<double>(m);
  double b = 0.0;
  for (double mj : means) b += (mj - grand) * (mj - grand);
  b *= static_cast<double>(len) / static_cast<double>(m - 1);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (double v : halves[j]) s += (v - means[j]) * (v - means[j]);
    w += s / static_cast<double>(len - 1);
  }
  w /= static_cast<double>(m);
  if (w <= 0.0) return 1.0;
  const double var_plus =
      (static_cast<double>(len - 1) / len) * w + b / static_cast<double>(len);
  return std::sqrt(var_plus / w);
}

}  // namespace qlbart
