#pragma once

// Quasi-likelihood families: variance functions, links, quasi-deviances,
// standardized residuals, moment estimators of the dispersion, and the
// moment-matched log-gamma leaf prior.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qlbart/errors.hpp"
#include "qlbart/special.hpp"

namespace qlbart {

enum class Family { binomial, poisson, gamma, power, multinomial };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::binomial: return "binomial";
    case Family::poisson: return "poisson";
    case Family::gamma: return "gamma";
    case Family::power: return "power";
    case Family::multinomial: return "multinomial";
  }
  return "?";
}

inline Family family_from_name(const std::string& name) {
  if (name == "binomial") return Family::binomial;
  if (name == "poisson") return Family::poisson;
  if (name == "gamma") return Family::gamma;
  if (name == "power") return Family::power;
  if (name == "multinomial") return Family::multinomial;
  throw ConfigError("unknown family: " + name);
}

// Model family: variance function V, link, power exponent kappa (power
// family only), and outcome dimension K (1 except multinomial).
struct QuasiFamily {
  Family kind = Family::poisson;
  double kappa = 1.5;  // meaningful only for kind == power
  int dim = 1;         // K; >= 2 for multinomial

  QuasiFamily() = default;
  QuasiFamily(Family k, double kappa_, int dim_) : kind(k), kappa(kappa_), dim(dim_) {
    validate();
  }

  void validate() const {
    if (!std::isfinite(kappa)) throw ConfigError("QuasiFamily: kappa must be finite");
    if (kind == Family::multinomial) {
      if (dim < 2) throw ConfigError("QuasiFamily: multinomial needs K >= 2");
    } else if (dim != 1) {
      throw ConfigError("QuasiFamily: scalar family must have K = 1");
    }
  }

  static QuasiFamily binomial() { return {Family::binomial, 1.0, 1}; }
  static QuasiFamily poisson() { return {Family::poisson, 1.0, 1}; }
  static QuasiFamily gamma() { return {Family::gamma, 2.0, 1}; }
  static QuasiFamily power(double kappa) { return {Family::power, kappa, 1}; }
  static QuasiFamily multinomial(int k) { return {Family::multinomial, 1.0, k}; }
};

namespace detail {
inline void check_mean_domain(Family kind, double mu) {
  switch (kind) {
    case Family::binomial:
      if (!(mu > 0.0) || !(mu < 1.0))
        throw std::domain_error("binomial mean must lie in (0,1), got " + std::to_string(mu));
      break;
    case Family::poisson:
    case Family::gamma:
    case Family::power:
      if (!(mu > 0.0))
        throw std::domain_error(family_name(kind) + " mean must be positive, got " +
                                std::to_string(mu));
      break;
    case Family::multinomial:
      throw std::domain_error("scalar operation called with multinomial family");
  }
}
constexpr double kKappaDispatchTol = 1e-8;
}  // namespace detail

// V(mu) for the scalar families.
inline double variance_function(const QuasiFamily& family, double mu) {
  detail::check_mean_domain(family.kind, mu);
  switch (family.kind) {
    case Family::binomial: return mu * (1.0 - mu);
    case Family::poisson: return mu;
    case Family::gamma: return mu * mu;
    case Family::power: return std::pow(mu, family.kappa);
    default: break;
  }
  throw std::domain_error("variance_function: unsupported family");
}

// V(mu) = D_mu - mu mu^T for the multinomial; symmetric PSD with null vector 1.
inline std::vector<double> variance_matrix(const QuasiFamily& family,
                                           const std::vector<double>& mu) {
  if (family.kind != Family::multinomial)
    throw std::domain_error("variance_matrix: multinomial only");
  const int k = family.dim;
  if (static_cast<int>(mu.size()) != k)
    throw std::domain_error("variance_matrix: mean dimension mismatch");
  double total = 0.0;
  for (double m : mu) {
    if (!(m > 0.0)) throw std::domain_error("multinomial mean must be on the open simplex");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw std::domain_error("multinomial mean must sum to 1");
  std::vector<double> v(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      v[static_cast<std::size_t>(i) * k + j] = (i == j ? mu[i] : 0.0) - mu[i] * mu[j];
  return v;
}

inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

// D(y, mu) = 2 int_mu^y (y - t) / V(t) dt, closed forms per family.
// Power exponents within 1e-8 of 1 or 2 dispatch to the Poisson/gamma forms.
inline double quasi_deviance(const QuasiFamily& family, double y, double mu) {
  detail::check_mean_domain(family.kind, mu);
  switch (family.kind) {
    case Family::binomial: {
      if (!(y >= 0.0) || !(y <= 1.0))
        throw std::domain_error("binomial outcome must lie in [0,1]");
      return 2.0 * (xlogy(y, y / mu) + xlogy(1.0 - y, (1.0 - y) / (1.0 - mu)));
    }
    case Family::poisson: {
      if (!(y >= 0.0)) throw std::domain_error("poisson outcome must be >= 0");
      return 2.0 * (xlogy(y, y / mu) - (y - mu));
    }
    case Family::gamma: {
      if (!(y > 0.0)) throw std::domain_error("gamma outcome must be > 0");
      return 2.0 * ((y - mu) / mu - std::log(y / mu));
    }
    case Family::power: {
      const double kappa = family.kappa;
      if (std::abs(kappa - 1.0) < detail::kKappaDispatchTol)
        return quasi_deviance(QuasiFamily::poisson(), y, mu);
      if (std::abs(kappa - 2.0) < detail::kKappaDispatchTol)
        return quasi_deviance(QuasiFamily::gamma(), y, mu);
      if (!(y >= 0.0)) throw std::domain_error("power outcome must be >= 0");
      if (y == 0.0 && kappa >= 2.0) return std::numeric_limits<double>::infinity();
      const double a = 1.0 - kappa, b = 2.0 - kappa;
      const double y_pow_b = std::pow(y, b);
      const double term1 = (y * std::pow(mu, a) - y_pow_b) / a;
      const double term2 = (std::pow(mu, b) - y_pow_b) / b;
      return -2.0 * (term1 - term2);
    }
    default:
      throw std::domain_error("quasi_deviance: use the vector overload for multinomial");
  }
}

// Multinomial quasi-deviance: 2 sum_k y_k log(y_k / mu_k) per unit weight.
inline double quasi_deviance(const QuasiFamily& family, const std::vector<double>& y,
                             const std::vector<double>& mu) {
  if (family.kind != Family::multinomial)
    throw std::domain_error("vector quasi_deviance: multinomial only");
  if (y.size() != mu.size()) throw std::domain_error("quasi_deviance: size mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(mu[k] > 0.0)) throw std::domain_error("multinomial mean must be positive");
    if (!(y[k] >= 0.0)) throw std::domain_error("multinomial outcome must be >= 0");
    d += xlogy(y[k], y[k] / mu[k]);
  }
  return 2.0 * d;
}

// Inverse link: r -> mu. Quasi-gamma uses mu = exp(-r) so that the
// conjugate leaf updates stay log-gamma shaped.
inline double mean_from_r(const QuasiFamily& family, double r) {
  switch (family.kind) {
    case Family::binomial: return 1.0 / (1.0 + std::exp(r));
    case Family::poisson:
    case Family::power: return std::exp(r);
    case Family::gamma: return std::exp(-r);
    default:
      throw std::domain_error("mean_from_r: use the vector overload for multinomial");
  }
}

// Softmax with max subtraction.
inline std::vector<double> mean_from_r(const QuasiFamily& family,
                                       const std::vector<double>& r) {
  if (family.kind != Family::multinomial)
    throw std::domain_error("vector mean_from_r: multinomial only");
  std::vector<double> mu(r.size());
  const double m = *std::max_element(r.begin(), r.end());
  double total = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    mu[k] = std::exp(r[k] - m);
    total += mu[k];
  }
  for (double& v : mu) v /= total;
  return mu;
}

// Link r = g(mu); inverse of mean_from_r for the scalar families.
inline double r_from_mean(const QuasiFamily& family, double mu) {
  detail::check_mean_domain(family.kind, mu);
  switch (family.kind) {
    case Family::binomial: return std::log((1.0 - mu) / mu);
    case Family::poisson:
    case Family::power: return std::log(mu);
    case Family::gamma: return -std::log(mu);
    default: throw std::domain_error("r_from_mean: scalar families only");
  }
}

// Z = sqrt(omega) (y - mu) / sqrt(V(mu)); E(Z^2) = phi under the model.
inline double standardized_residual(const QuasiFamily& family, double y, double mu,
                                    double omega) {
  if (!(omega > 0.0)) throw std::domain_error("standardized_residual: omega must be > 0");
  const double v = variance_function(family, mu);
  return std::sqrt(omega) * (y - mu) / std::sqrt(v);
}

// Per-observation squared standardized residual with the multinomial
// normalized by K-1 so that its expectation is phi for every family.
inline double squared_residual(const QuasiFamily& family, const std::vector<double>& y,
                               const std::vector<double>& mu, double omega) {
  if (family.kind == Family::multinomial) {
    double q = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (!(mu[k] > 0.0)) throw std::domain_error("multinomial mean must be positive");
      const double d = y[k] - mu[k];
      q += d * d / mu[k];
    }
    return omega * q / (family.dim - 1);
  }
  const double z = standardized_residual(family, y[0], mu[0], omega);
  return z * z;
}

// Moment estimator of phi, Pearson-style. Scalar families divide by N - P
// (df_correction = P); the multinomial divides by N (K - 1).
inline double moment_estimator_phi(const QuasiFamily& family,
                                   const std::vector<std::vector<double>>& y,
                                   const std::vector<std::vector<double>>& mu,
                                   const std::vector<double>& omega, int df_correction = 0) {
  const std::size_t n = y.size();
  if (mu.size() != n || omega.size() != n)
    throw std::domain_error("moment_estimator_phi: size mismatch");
  if (family.kind == Family::multinomial) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < y[i].size(); ++k) {
        const double d = y[i][k] - mu[i][k];
        total += omega[i] * d * d / mu[i][k];
      }
    }
    return total / (static_cast<double>(n) * (family.dim - 1));
  }
  if (static_cast<int>(n) <= df_correction)
    throw std::domain_error("moment_estimator_phi: need N > df_correction");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i][0] - mu[i][0];
    total += omega[i] * d * d / variance_function(family, mu[i][0]);
  }
  return total / (static_cast<double>(n) - df_correction);
}

// Scalar-convenience overload.
inline double moment_estimator_phi(const QuasiFamily& family, const std::vector<double>& y,
                                   const std::vector<double>& mu,
                                   const std::vector<double>& omega, int df_correction = 0) {
  std::vector<std::vector<double>> yy(y.size()), mm(mu.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    yy[i] = {y[i]};
    mm[i] = {mu[i]};
  }
  return moment_estimator_phi(family, yy, mm, omega, df_correction);
}

// Zero-mean log-gamma leaf prior: lambda = log G, G ~ Gam(a, b) with
// trigamma(a) = sigma^2 and digamma(a) = log b.
struct LeafPrior {
  double a = 1.0;
  double b = 1.0;
  double sigma_lambda = 1.0;
  double k_scale = 2.0;
};

inline LeafPrior leaf_prior_from_sigma(double sigma_lambda, double k_scale = 2.0) {
  if (!(sigma_lambda > 0.0))
    throw std::domain_error("leaf_prior_from_sigma: sigma_lambda must be > 0");
  LeafPrior prior;
  prior.sigma_lambda = sigma_lambda;
  prior.k_scale = k_scale;
  prior.a = trigamma_inverse(sigma_lambda * sigma_lambda);
  prior.b = std::exp(digamma(prior.a));
  return prior;
}

// log density of lambda = log G, G ~ Gam(a, rate b).
inline double log_gamma_leaf_logpdf(double lambda, double a, double b) {
  return a * std::log(b) - log_gamma(a) + a * lambda - b * std::exp(lambda);
}

}  // namespace qlbart
