#pragma once

// Seeded synthetic data generators for the benchmark scenarios. Every
// generator is a deterministic function of its parameters and the seed.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qlbart/data.hpp"
#include "qlbart/errors.hpp"
#include "qlbart/rng.hpp"

namespace qlbart {

enum class Scenario { qpois_bvm, power_grid, invgamma_friedman, gamma_power,
                      dirichlet_multinomial };

inline std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::qpois_bvm: return "qpois_bvm";
    case Scenario::power_grid: return "power_grid";
    case Scenario::invgamma_friedman: return "invgamma_friedman";
    case Scenario::gamma_power: return "gamma_power";
    case Scenario::dirichlet_multinomial: return "dirichlet_multinomial";
  }
  return "?";
}

inline Scenario scenario_from_name(const std::string& name) {
  if (name == "qpois_bvm") return Scenario::qpois_bvm;
  if (name == "power_grid") return Scenario::power_grid;
  if (name == "invgamma_friedman") return Scenario::invgamma_friedman;
  if (name == "gamma_power") return Scenario::gamma_power;
  if (name == "dirichlet_multinomial") return Scenario::dirichlet_multinomial;
  throw ConfigError("unknown scenario: " + name);
}

struct ScenarioSpec {
  Scenario scenario = Scenario::qpois_bvm;
  std::size_t n = 250;
  std::size_t p = 10;
  double phi = 1.0;
  double kappa = 1.0;  // power_grid: 1 or 2
  double rho = 0.5;    // dirichlet_multinomial
  std::uint64_t seed = 0;

  void validate() const {
    if (n == 0) throw ConfigError("scenario: n must be positive");
    switch (scenario) {
      case Scenario::qpois_bvm:
      case Scenario::invgamma_friedman:
      case Scenario::gamma_power:
        if (!(phi > 0.0)) throw ConfigError("scenario: phi must be > 0");
        break;
      case Scenario::power_grid:
        if (!(phi > 0.0)) throw ConfigError("scenario: phi must be > 0");
        if (kappa != 1.0 && kappa != 2.0)
          throw ConfigError("scenario power_grid: kappa must be 1 or 2");
        break;
      case Scenario::dirichlet_multinomial:
        if (!(rho > 0.0)) throw ConfigError("scenario: rho must be > 0");
        break;
    }
    if (scenario == Scenario::invgamma_friedman || scenario == Scenario::gamma_power) {
      if (p < 5) throw ConfigError("scenario: friedman settings need p >= 5");
    }
  }
};

// Friedman test function r(x) = sin(pi x1 x2) + 2 (x3 - 1/2)^2 + x4 + x5/2.
inline double friedman_r(const double* x) {
  return std::sin(M_PI * x[0] * x[1]) + 2.0 * (x[2] - 0.5) * (x[2] - 0.5) + x[3] + 0.5 * x[4];
}

inline double friedman_r(const std::vector<double>& x) {
  if (x.size() < 5) throw ConfigError("friedman_r: need at least 5 coordinates");
  return friedman_r(x.data());
}

namespace detail {

inline void name_features(Dataset& data) {
  data.feature_names.resize(data.p);
  for (std::size_t j = 0; j < data.p; ++j) data.feature_names[j] = "x" + std::to_string(j + 1);
}

}  // namespace detail

// Scaled Poisson outcomes Y = phi Z, Z ~ Poisson(mu / phi) with
// mu = exp(beta0 + beta1 x), x ~ Normal(0, 1). Var(Y | x) = phi mu.
inline Dataset gen_qpois(std::size_t n, double beta0, double beta1, double phi,
                         std::uint64_t seed) {
  if (!(phi > 0.0)) throw ConfigError("gen_qpois: phi must be > 0");
  Rng rng(seed);
  Dataset data;
  data.n = n;
  data.p = 1;
  data.k = 1;
  data.x.resize(n);
  data.y.resize(n);
  data.weight.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    data.x[i] = rng.normal();
    const double mu = std::exp(beta0 + beta1 * data.x[i]);
    data.y[i] = phi * static_cast<double>(rng.poisson(mu / phi));
  }
  detail::name_features(data);
  return data;
}

// Power-variance grid: P = 5 uniform covariates, mu = exp(x^T beta) with
// ||beta|| = 1.2 (kappa = 1) or 2.0 (kappa = 2). kappa = 1 draws scaled
// Poisson outcomes; kappa = 2 draws Y = mu eps with eps ~ Gam(1/phi, 1/phi),
// so Var(Y | x) = phi mu^2.
inline Dataset gen_power_grid(std::size_t n, double kappa, double phi, std::uint64_t seed) {
  if (kappa != 1.0 && kappa != 2.0) throw ConfigError("gen_power_grid: kappa must be 1 or 2");
  if (!(phi > 0.0)) throw ConfigError("gen_power_grid: phi must be > 0");
  const std::size_t p = 5;
  const double coef = (kappa == 1.0 ? 1.2 : 2.0) / std::sqrt(5.0);
  Rng rng(seed);
  Dataset data;
  data.n = n;
  data.p = p;
  data.k = 1;
  data.x.resize(n * p);
  data.y.resize(n);
  data.weight.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      data.x[i * p + j] = rng.uniform();
      r += coef * data.x[i * p + j];
    }
    const double mu = std::exp(r);
    if (kappa == 1.0) {
      data.y[i] = phi * static_cast<double>(rng.poisson(mu / phi));
    } else {
      data.y[i] = mu * rng.gamma(1.0 / phi, 1.0 / phi);
    }
  }
  detail::name_features(data);
  return data;
}

// Inverse-gamma outcomes on the Friedman surface: 1/Y ~ Gam(alpha, (alpha-1) mu)
// with alpha = 2 + 1/phi, so E(Y|x) = mu and Var(Y|x) = phi mu^2.
inline Dataset gen_invgamma_friedman(std::size_t n, std::size_t p, double phi,
                                     std::uint64_t seed) {
  if (!(phi > 0.0)) throw ConfigError("gen_invgamma_friedman: phi must be > 0");
  if (p < 5) throw ConfigError("gen_invgamma_friedman: need p >= 5");
  const double alpha = 2.0 + 1.0 / phi;
  Rng rng(seed);
  Dataset data;
  data.n = n;
  data.p = p;
  data.k = 1;
  data.x.resize(n * p);
  data.y.resize(n);
  data.weight.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) data.x[i * p + j] = rng.uniform();
    const double mu = std::exp(friedman_r(data.x.data() + i * p));
    data.y[i] = 1.0 / rng.gamma(alpha, (alpha - 1.0) * mu);
  }
  detail::name_features(data);
  return data;
}

// Gamma outcomes with alpha(x) = e^{r/2}/phi, rate(x) = e^{-r/2}/phi on the
// Friedman surface: E(Y|x) = e^r, Var(Y|x) = phi mu^{1.5} (quasi-power, kappa = 1.5).
inline Dataset gen_gamma_power(std::size_t n, std::size_t p, double phi, std::uint64_t seed) {
  if (!(phi > 0.0)) throw ConfigError("gen_gamma_power: phi must be > 0");
  if (p < 5) throw ConfigError("gen_gamma_power: need p >= 5");
  Rng rng(seed);
  Dataset data;
  data.n = n;
  data.p = p;
  data.k = 1;
  data.x.resize(n * p);
  data.y.resize(n);
  data.weight.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) data.x[i * p + j] = rng.uniform();
    const double r = friedman_r(data.x.data() + i * p);
    data.y[i] = rng.gamma(std::exp(0.5 * r) / phi, std::exp(-0.5 * r) / phi);
  }
  detail::name_features(data);
  return data;
}

inline void dirichlet_multinomial_means(const double* x, double* mu) {
  const double r1 = 2.0 * x[0] + x[1];
  const double r2 = x[0] + 4.0 * x[1] * x[2];
  const double r3 = x[1] + 2.0 * x[2];
  const double m = std::max(r1, std::max(r2, r3));
  const double e1 = std::exp(r1 - m), e2 = std::exp(r2 - m), e3 = std::exp(r3 - m);
  const double total = e1 + e2 + e3;
  mu[0] = e1 / total;
  mu[1] = e2 / total;
  mu[2] = e3 / total;
}

// Dirichlet(rho mu_1, rho mu_2, rho mu_3) outcomes with softmax means on
// [0,1]^5; quasi-multinomial with phi = 1/(1+rho) and n = 1.
inline Dataset gen_dirichlet_multinomial(std::size_t n, double rho, std::uint64_t seed) {
  if (!(rho > 0.0)) throw ConfigError("gen_dirichlet_multinomial: rho must be > 0");
  const std::size_t p = 5, k = 3;
  Rng rng(seed);
  Dataset data;
  data.n = n;
  data.p = p;
  data.k = k;
  data.x.resize(n * p);
  data.y.resize(n * k);
  data.weight.assign(n, 1.0);
  double mu[3];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) data.x[i * p + j] = rng.uniform();
    dirichlet_multinomial_means(data.x.data() + i * p, mu);
    const std::vector<double> draw = rng.dirichlet({rho * mu[0], rho * mu[1], rho * mu[2]});
    for (std::size_t c = 0; c < k; ++c) data.y[i * k + c] = draw[c];
  }
  detail::name_features(data);
  return data;
}

// Dispatch by spec; qpois_bvm uses the default coefficients (1, 0.5).
inline Dataset generate(const ScenarioSpec& spec) {
  spec.validate();
  switch (spec.scenario) {
    case Scenario::qpois_bvm: return gen_qpois(spec.n, 1.0, 0.5, spec.phi, spec.seed);
    case Scenario::power_grid: return gen_power_grid(spec.n, spec.kappa, spec.phi, spec.seed);
    case Scenario::invgamma_friedman:
      return gen_invgamma_friedman(spec.n, spec.p, spec.phi, spec.seed);
    case Scenario::gamma_power: return gen_gamma_power(spec.n, spec.p, spec.phi, spec.seed);
    case Scenario::dirichlet_multinomial:
      return gen_dirichlet_multinomial(spec.n, spec.rho, spec.seed);
  }
  throw ConfigError("generate: unhandled scenario");
}

}  // namespace qlbart
