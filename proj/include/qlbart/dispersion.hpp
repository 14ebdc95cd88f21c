#pragma once

// Dispersion updates: extended quasi-posterior (EQP), pseudo-likelihood
// posterior (PLP), Bayesian-bootstrap quasi-likelihood (BBQ), the iterative
// pseudo-empirical-Bayes point estimator, and the truncated inverse-gamma
// update used by the two-step Gibbs sampler.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qlbart/errors.hpp"
#include "qlbart/family.hpp"
#include "qlbart/rng.hpp"
#include "qlbart/special.hpp"

namespace qlbart {

enum class DispersionMethod { fixed, eqp, plp, bbq, pseudo_eb };

inline std::string dispersion_method_name(DispersionMethod m) {
  switch (m) {
    case DispersionMethod::fixed: return "fixed";
    case DispersionMethod::eqp: return "eqp";
    case DispersionMethod::plp: return "plp";
    case DispersionMethod::bbq: return "bbq";
    case DispersionMethod::pseudo_eb: return "pseudo-eb";
  }
  return "?";
}

inline DispersionMethod dispersion_method_from_name(const std::string& name) {
  if (name == "fixed") return DispersionMethod::fixed;
  if (name == "eqp") return DispersionMethod::eqp;
  if (name == "plp") return DispersionMethod::plp;
  if (name == "bbq") return DispersionMethod::bbq;
  if (name == "pseudo-eb" || name == "pseudo_eb") return DispersionMethod::pseudo_eb;
  throw ConfigError("unknown dispersion method: " + name);
}

struct DispersionConfig {
  DispersionMethod method = DispersionMethod::bbq;
  double prior_a = 0.5;  // phi^{-1} ~ Gam(prior_a, prior_b) for EQP/PLP
  double prior_b = 0.5;
  double kappa_min = 0.5;
  double kappa_max = 3.0;
  bool estimate_kappa = false;
  double truncation_lo = 0.1;  // theory mode only
  double truncation_hi = 10.0;

  void validate() const {
    if (!(prior_a > 0.0) || !(prior_b > 0.0))
      throw ConfigError("dispersion: prior_a and prior_b must be positive");
    if (!(kappa_min < kappa_max)) throw ConfigError("dispersion: kappa bounds out of order");
    if (!(truncation_lo > 0.0) || !(truncation_lo < truncation_hi) ||
        !std::isfinite(truncation_hi))
      throw ConfigError("dispersion: need 0 < truncation_lo < truncation_hi < inf");
    if (estimate_kappa && (method == DispersionMethod::eqp || method == DispersionMethod::fixed))
      throw ConfigError("dispersion: kappa estimation requires plp, bbq or pseudo-eb");
  }
};

// Residual inputs for the kappa-estimating updates.
struct ResidualTriple {
  double y;
  double mu;
  double omega;
};

// EQP full conditional: phi^{-1} ~ Gam(a + N/2, b + sum_i omega_i D_i / 2).
inline double eqp_update(double sum_weighted_deviance, std::size_t n, double prior_a,
                         double prior_b, Rng& rng) {
  if (!(sum_weighted_deviance >= 0.0)) throw NumericError("eqp_update: negative deviance sum");
  return 1.0 / rng.gamma(prior_a + 0.5 * static_cast<double>(n),
                         prior_b + 0.5 * sum_weighted_deviance);
}

// PLP full conditional: phi^{-1} ~ Gam(a + N/2, b + sum_i Z_i^2 / 2).
inline double plp_update(const std::vector<double>& standardized_residuals, double prior_a,
                         double prior_b, Rng& rng) {
  double sum_sq = 0.0;
  for (double z : standardized_residuals) {
    if (!std::isfinite(z)) throw NumericError("plp_update: non-finite residual");
    sum_sq += z * z;
  }
  return 1.0 / rng.gamma(prior_a + 0.5 * static_cast<double>(standardized_residuals.size()),
                         prior_b + 0.5 * sum_sq);
}

struct BbqResult {
  double phi = 0.0;
  double kappa = 0.0;
  bool degenerate = false;
};

// BBQ: p ~ Dirichlet(1,...,1), phi = sum_i p_i Z_i^2.
inline BbqResult bbq_update(const std::vector<double>& squared_residuals, Rng& rng) {
  BbqResult out;
  const std::vector<double> p =
      rng.dirichlet(std::vector<double>(squared_residuals.size(), 1.0));
  double phi = 0.0;
  bool any_positive = false;
  for (std::size_t i = 0; i < squared_residuals.size(); ++i) {
    phi += p[i] * squared_residuals[i];
    if (squared_residuals[i] > 0.0) any_positive = true;
  }
  out.phi = phi;
  out.degenerate = !any_positive;
  return out;
}

namespace detail {

// Golden-section maximization of a unimodal function on [lo, hi].
template <class F>
inline double golden_section_max(const F& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Weighted normal log-likelihood sum_i p_i log Normal(y_i | mu_i, phi mu_i^kappa / omega_i).
inline double weighted_normal_loglik(const std::vector<ResidualTriple>& resid,
                                     const std::vector<double>& p, double phi, double kappa) {
  double ll = 0.0;
  for (std::size_t i = 0; i < resid.size(); ++i) {
    const double v = phi * std::pow(resid[i].mu, kappa) / resid[i].omega;
    const double d = resid[i].y - resid[i].mu;
    ll += p[i] * (-0.5 * std::log(2.0 * M_PI * v) - 0.5 * d * d / v);
  }
  return ll;
}

}  // namespace detail

// BBQ with variance-function estimation: for fixed kappa the optimal phi is
// the weighted mean of Z_i(kappa)^2, so the weighted normal log-likelihood
// is profiled down to one dimension and maximized over kappa by
// golden-section search.
inline BbqResult bbq_update_kappa(const std::vector<ResidualTriple>& resid, double kappa_min,
                                  double kappa_max, Rng& rng) {
  BbqResult out;
  const std::vector<double> p = rng.dirichlet(std::vector<double>(resid.size(), 1.0));

  const auto phi_for = [&](double kappa) {
    double phi = 0.0;
    for (std::size_t i = 0; i < resid.size(); ++i) {
      const double d = resid[i].y - resid[i].mu;
      phi += p[i] * resid[i].omega * d * d / std::pow(resid[i].mu, kappa);
    }
    return phi;
  };
  const auto profiled = [&](double kappa) {
    const double phi = phi_for(kappa);
    if (!(phi > 0.0)) return -std::numeric_limits<double>::infinity();
    double sum_log_mu = 0.0;
    for (std::size_t i = 0; i < resid.size(); ++i)
      sum_log_mu += p[i] * (kappa * std::log(resid[i].mu) - std::log(resid[i].omega));
    return -0.5 * (std::log(2.0 * M_PI * phi) + sum_log_mu + 1.0);
  };

  out.kappa = detail::golden_section_max(profiled, kappa_min, kappa_max, 1e-6);
  out.phi = phi_for(out.kappa);
  out.degenerate = !(out.phi > 0.0);
  return out;
}

// Random-walk Metropolis step on kappa targeting PL(phi, kappa) with a
// uniform prior on [kappa_min, kappa_max] (used by PLP for the quasi-power).
inline double plp_kappa_update(const std::vector<ResidualTriple>& resid, double phi,
                               double kappa, double kappa_min, double kappa_max, Rng& rng,
                               double step = 0.05) {
  const std::vector<double> unit(resid.size(), 1.0);
  const double proposal = kappa + step * rng.normal();
  if (proposal < kappa_min || proposal > kappa_max) return kappa;
  const double ll_cur = detail::weighted_normal_loglik(resid, unit, phi, kappa);
  const double ll_new = detail::weighted_normal_loglik(resid, unit, phi, proposal);
  return (std::log(rng.uniform()) <= ll_new - ll_cur) ? proposal : kappa;
}

// One draw from InvGam(n/2, phi_hat n/2) truncated to [lo, hi], via the
// gamma CDF of 1/phi restricted to [1/hi, 1/lo].
inline double truncated_inv_gamma_draw(double phi_hat, std::size_t n, double lo, double hi,
                                       Rng& rng) {
  if (!(lo > 0.0) || !(lo < hi)) throw ConfigError("truncated_inv_gamma_draw: bad interval");
  const double shape = 0.5 * static_cast<double>(n);
  const double rate = 0.5 * static_cast<double>(n) * phi_hat;
  const double p_lo = gamma_p(shape, rate / hi);
  const double p_hi = gamma_p(shape, rate / lo);
  const double mass = p_hi - p_lo;
  if (!(mass > 1e-12))
    throw NumericError("truncated_inv_gamma_draw: truncation interval carries no mass");
  const double v = p_lo + rng.uniform() * mass;
  const double x = gamma_p_inverse(shape, v);
  return rate / x;
}

// Pseudo-empirical-Bayes point estimation: alternate short posterior runs at
// the current (phi, kappa) with maximization of the posterior-averaged
// pseudo-likelihood over the retained draws. The chain runner returns one
// ResidualTriple set per retained draw.
struct PseudoEbResult {
  std::vector<double> phi_path;
  std::vector<double> kappa_path;
  double phi = 1.0;
  double kappa = 1.5;
};

inline PseudoEbResult pseudo_eb(
    const std::function<std::vector<std::vector<ResidualTriple>>(double phi, double kappa)>&
        chain_runner,
    double phi_init, double kappa_init, int iterations, bool estimate_kappa, double kappa_min,
    double kappa_max) {
  if (iterations < 1) throw ConfigError("pseudo_eb: iterations must be >= 1");
  PseudoEbResult out;
  out.phi = phi_init;
  out.kappa = kappa_init;
  for (int it = 0; it < iterations; ++it) {
    const std::vector<std::vector<ResidualTriple>> draws = chain_runner(out.phi, out.kappa);
    if (draws.empty()) throw NumericError("pseudo_eb: chain runner returned no draws");
    const std::size_t n = draws.front().size();
    const std::vector<double> unit(n, 1.0);

    // log of the draw-averaged PL via logsumexp over retained draws
    const auto avg_log_pl = [&](double phi, double kappa) {
      double max_ll = -std::numeric_limits<double>::infinity();
      std::vector<double> lls(draws.size());
      for (std::size_t m = 0; m < draws.size(); ++m) {
        lls[m] = detail::weighted_normal_loglik(draws[m], unit, phi, kappa);
        max_ll = std::max(max_ll, lls[m]);
      }
      double total = 0.0;
      for (double ll : lls) total += std::exp(ll - max_ll);
      return max_ll + std::log(total / static_cast<double>(draws.size()));
    };

    double kappa_next = out.kappa;
    double phi_next = out.phi;
    for (int round = 0; round < (estimate_kappa ? 3 : 1); ++round) {
      const auto phi_objective = [&](double log_phi) {
        return avg_log_pl(std::exp(log_phi), kappa_next);
      };
      phi_next = std::exp(detail::golden_section_max(
          phi_objective, std::log(phi_next) - 6.0, std::log(phi_next) + 6.0, 1e-8));
      if (estimate_kappa) {
        const auto kappa_objective = [&](double kappa) { return avg_log_pl(phi_next, kappa); };
        kappa_next = detail::golden_section_max(kappa_objective, kappa_min, kappa_max, 1e-6);
      }
    }
    // argmax must not lose to the incumbent on the same draw set
    if (avg_log_pl(phi_next, kappa_next) < avg_log_pl(out.phi, out.kappa)) {
      phi_next = out.phi;
      kappa_next = out.kappa;
    }
    out.phi = phi_next;
    out.kappa = kappa_next;
    out.phi_path.push_back(out.phi);
    out.kappa_path.push_back(out.kappa);
  }
  return out;
}

}  // namespace qlbart
