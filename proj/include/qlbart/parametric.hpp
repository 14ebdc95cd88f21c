#pragma once

// Parametric quasi-likelihood tooling: maximum quasi-likelihood via IRLS,
// adaptive random-walk Metropolis on the quasi-posterior, the two-step
// Gibbs sampler (beta | phi alternated with the truncated inverse-gamma
// phi | beta), and the Bayesian-bootstrap Poisson estimator.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qlbart/data.hpp"
#include "qlbart/dispersion.hpp"
#include "qlbart/errors.hpp"
#include "qlbart/family.hpp"
#include "qlbart/rng.hpp"

namespace qlbart {

struct ParametricModel {
  QuasiFamily family;
  double prior_radius = std::numeric_limits<double>::infinity();  // flat prior on a ball
};

namespace detail {

inline Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
design_matrix(const Dataset& data) {
  return {data.x.data(), static_cast<Eigen::Index>(data.n), static_cast<Eigen::Index>(data.p)};
}

// dg/dmu for the scalar links.
inline double link_derivative(const QuasiFamily& family, double mu) {
  switch (family.kind) {
    case Family::poisson:
    case Family::power: return 1.0 / mu;
    case Family::gamma: return -1.0 / mu;
    case Family::binomial: return -1.0 / (mu * (1.0 - mu));
    default: throw std::domain_error("link_derivative: scalar families only");
  }
}

inline void check_full_rank(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) throw SchemaError("design matrix is rank deficient");
}

}  // namespace detail

struct MqleFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd h_hat;     // X^T W X / N at beta_hat
  double phi_moment = 1.0;   // Pearson estimator with df correction P
  int iterations = 0;
};

// Quasi-score sum_i omega_i (y_i - mu_i) / (V(mu_i) g'(mu_i)) x_i.
inline Eigen::VectorXd quasi_score(const QuasiFamily& family, const Dataset& data,
                                   const Eigen::VectorXd& beta) {
  const auto x = detail::design_matrix(data);
  Eigen::VectorXd score = Eigen::VectorXd::Zero(beta.size());
  for (std::size_t i = 0; i < data.n; ++i) {
    const double r = x.row(static_cast<Eigen::Index>(i)).dot(beta);
    const double mu = mean_from_r(family, r);
    const double coef = data.weight[i] * (data.yval(i) - mu) /
                        (variance_function(family, mu) * detail::link_derivative(family, mu));
    score += coef * x.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return score;
}

inline double weighted_deviance(const QuasiFamily& family, const Dataset& data,
                                const Eigen::VectorXd& beta) {
  const auto x = detail::design_matrix(data);
  double dev = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const double mu = mean_from_r(family, x.row(static_cast<Eigen::Index>(i)).dot(beta));
    dev += data.weight[i] * quasi_deviance(family, data.yval(i), mu);
  }
  return dev;
}

// IRLS with step halving; per-observation weight multipliers support the
// Bayesian-bootstrap variant. Converges on the quasi-score norm.
inline MqleFit fit_mqle_weighted(const QuasiFamily& family, const Dataset& data,
                                 const std::vector<double>& extra_weight,
                                 int max_iterations = 100) {
  const auto x = detail::design_matrix(data);
  detail::check_full_rank(x);
  const Eigen::Index p = x.cols();
  MqleFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);

  Dataset working = data;
  for (std::size_t i = 0; i < data.n; ++i) working.weight[i] = data.weight[i] * extra_weight[i];

  double dev = weighted_deviance(family, working, fit.beta);
  const double score_scale = std::max(1.0, quasi_score(family, working, fit.beta).norm());
  double norm = std::numeric_limits<double>::infinity();

  for (fit.iterations = 0; fit.iterations < max_iterations; ++fit.iterations) {
    norm = quasi_score(family, working, fit.beta).norm();
    if (norm < 1e-10 * score_scale) break;

    Eigen::MatrixXd xtwx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xtwz = Eigen::VectorXd::Zero(p);
    for (std::size_t i = 0; i < data.n; ++i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      const double r = x.row(ii).dot(fit.beta);
      const double mu = mean_from_r(family, r);
      const double gp = detail::link_derivative(family, mu);
      const double w = working.weight[i] / (gp * gp * variance_function(family, mu));
      const double z = r + gp * (working.yval(i) - mu);
      xtwx.noalias() += w * x.row(ii).transpose() * x.row(ii);
      xtwz.noalias() += w * z * x.row(ii).transpose();
    }
    Eigen::VectorXd next = xtwx.ldlt().solve(xtwz);

    double next_dev = weighted_deviance(family, working, next);
    for (int halving = 0; halving < 30 && !(next_dev <= dev + 1e-12 * std::abs(dev)); ++halving) {
      next = 0.5 * (next + fit.beta);
      next_dev = weighted_deviance(family, working, next);
    }
    if (!std::isfinite(next_dev)) throw NumericError("fit_mqle: deviance diverged");
    fit.beta = next;
    dev = next_dev;
  }
  norm = quasi_score(family, working, fit.beta).norm();
  if (norm > 1e-6 * score_scale)
    throw NumericError("fit_mqle: IRLS failed to converge (score norm " + std::to_string(norm) +
                       ")");

  Eigen::MatrixXd xtwx = Eigen::MatrixXd::Zero(p, p);
  double pearson = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const Eigen::Index ii = static_cast<Eigen::Index>(i);
    const double mu = mean_from_r(family, x.row(ii).dot(fit.beta));
    const double gp = detail::link_derivative(family, mu);
    const double v = variance_function(family, mu);
    xtwx.noalias() += (working.weight[i] / (gp * gp * v)) * x.row(ii).transpose() * x.row(ii);
    const double d = working.yval(i) - mu;
    pearson += working.weight[i] * d * d / v;
  }
  fit.h_hat = xtwx / static_cast<double>(data.n);
  fit.phi_moment = pearson / (static_cast<double>(data.n) - static_cast<double>(p));
  return fit;
}

inline MqleFit fit_mqle(const QuasiFamily& family, const Dataset& data) {
  return fit_mqle_weighted(family, data, std::vector<double>(data.n, 1.0));
}

// Moment estimator phi_hat(beta) with 1/N normalization (Condition G form).
inline double phi_hat_at(const QuasiFamily& family, const Dataset& data,
                         const Eigen::VectorXd& beta) {
  const auto x = detail::design_matrix(data);
  double total = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const double mu = mean_from_r(family, x.row(static_cast<Eigen::Index>(i)).dot(beta));
    const double d = data.yval(i) - mu;
    total += data.weight[i] * d * d / variance_function(family, mu);
  }
  return total / static_cast<double>(data.n);
}

struct BetaDraws {
  std::vector<Eigen::VectorXd> beta;
  std::vector<double> phi;  // filled by the samplers that update phi
  double acceptance_rate = 0.0;
  int rejected_solves = 0;  // bb_poisson resamples

  Eigen::VectorXd mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(beta.front().size());
    for (const Eigen::VectorXd& b : beta) m += b;
    return m / static_cast<double>(beta.size());
  }
  Eigen::VectorXd sd() const {
    const Eigen::VectorXd m = mean();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m.size());
    for (const Eigen::VectorXd& b : beta) s += (b - m).cwiseProduct(b - m);
    return (s / static_cast<double>(beta.size() - 1)).cwiseSqrt();
  }
};

namespace detail {

// Random-walk Metropolis with covariance adaptation during burn-in
// (2.38^2/P times the running empirical covariance, frozen afterwards).
class AdaptiveRwm {
 public:
  AdaptiveRwm(const Eigen::VectorXd& init, const Eigen::MatrixXd& proposal_cov)
      : beta_(init), mean_(init), cov_(proposal_cov),
        m2_(Eigen::MatrixXd::Zero(init.size(), init.size())) {
    refresh_factor(proposal_cov);
  }

  const Eigen::VectorXd& current() const { return beta_; }
  double acceptance_rate() const {
    return proposals_ == 0 ? 0.0 : static_cast<double>(accepts_) / proposals_;
  }

  template <class LogTarget>
  void step(const LogTarget& log_target, double& log_target_cur, bool adapt, Rng& rng) {
    const Eigen::Index p = beta_.size();
    Eigen::VectorXd noise(p);
    for (Eigen::Index j = 0; j < p; ++j) noise[j] = rng.normal();
    const Eigen::VectorXd proposal = beta_ + factor_ * noise;
    const double log_target_new = log_target(proposal);
    ++proposals_;
    if (std::log(rng.uniform()) <= log_target_new - log_target_cur) {
      beta_ = proposal;
      log_target_cur = log_target_new;
      ++accepts_;
    }
    if (adapt) accumulate();
  }

 private:
  void accumulate() {
    ++adapt_count_;
    const Eigen::VectorXd delta = beta_ - mean_;
    mean_ += delta / static_cast<double>(adapt_count_);
    m2_.noalias() += delta * (beta_ - mean_).transpose();
    if (adapt_count_ >= 50 && adapt_count_ % 50 == 0) {
      const double scale = 2.38 * 2.38 / static_cast<double>(beta_.size());
      Eigen::MatrixXd cov = scale * m2_ / static_cast<double>(adapt_count_ - 1);
      cov.diagonal().array() += 1e-12;
      refresh_factor(cov);
    }
  }

  void refresh_factor(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) factor_ = llt.matrixL();
  }

  Eigen::VectorXd beta_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd m2_;
  Eigen::MatrixXd factor_;
  long proposals_ = 0;
  long accepts_ = 0;
  long adapt_count_ = 0;
};

}  // namespace detail

// log quasi-posterior of beta given phi under a flat prior on the ball.
inline double log_quasi_posterior(const ParametricModel& model, const Dataset& data,
                                  const Eigen::VectorXd& beta, double phi) {
  if (beta.norm() > model.prior_radius) return -std::numeric_limits<double>::infinity();
  return -0.5 * weighted_deviance(model.family, data, beta) / phi;
}

// Adaptive RWM targeting the quasi-posterior of beta at fixed phi.
inline BetaDraws quasi_posterior_mh(const ParametricModel& model, const Dataset& data,
                                    double phi, int iterations, int burn_in, Rng& rng) {
  if (!(phi > 0.0)) throw ConfigError("quasi_posterior_mh: phi must be > 0");
  const MqleFit fit = fit_mqle(model.family, data);
  const Eigen::MatrixXd asymptotic_cov =
      (fit.h_hat * static_cast<double>(data.n)).inverse() * std::max(phi, 1e-8);
  detail::AdaptiveRwm rwm(fit.beta, 2.38 * 2.38 / static_cast<double>(fit.beta.size()) *
                                        asymptotic_cov);
  const auto log_target = [&](const Eigen::VectorXd& b) {
    return log_quasi_posterior(model, data, b, phi);
  };
  double cur = log_target(rwm.current());
  BetaDraws out;
  for (int it = 0; it < iterations; ++it) {
    rwm.step(log_target, cur, it < burn_in, rng);
    if (it >= burn_in) out.beta.push_back(rwm.current());
  }
  out.acceptance_rate = rwm.acceptance_rate();
  return out;
}

// Parametric BBQ quasi-posterior: RWM moves on beta given phi alternated
// with the Bayesian-bootstrap phi update from standardized residuals.
inline BetaDraws parametric_bbq_chain(const ParametricModel& model, const Dataset& data,
                                      int iterations, int burn_in, int beta_steps_per_iter,
                                      Rng& rng) {
  const auto x = detail::design_matrix(data);
  const MqleFit fit = fit_mqle(model.family, data);
  double phi = fit.phi_moment;
  const Eigen::MatrixXd asymptotic_cov =
      (fit.h_hat * static_cast<double>(data.n)).inverse() * phi;
  detail::AdaptiveRwm rwm(fit.beta, 2.38 * 2.38 / static_cast<double>(fit.beta.size()) *
                                        asymptotic_cov);
  BetaDraws out;
  std::vector<double> z2(data.n);
  for (int it = 0; it < iterations; ++it) {
    const auto log_target = [&](const Eigen::VectorXd& b) {
      return log_quasi_posterior(model, data, b, phi);
    };
    double cur = log_target(rwm.current());
    for (int s = 0; s < beta_steps_per_iter; ++s)
      rwm.step(log_target, cur, it < burn_in, rng);
    for (std::size_t i = 0; i < data.n; ++i) {
      const double mu =
          mean_from_r(model.family, x.row(static_cast<Eigen::Index>(i)).dot(rwm.current()));
      const double z = standardized_residual(model.family, data.yval(i), mu, data.weight[i]);
      z2[i] = z * z;
    }
    const BbqResult res = bbq_update(z2, rng);
    if (!res.degenerate) phi = res.phi;
    if (it >= burn_in) {
      out.beta.push_back(rwm.current());
      out.phi.push_back(phi);
    }
  }
  out.acceptance_rate = rwm.acceptance_rate();
  return out;
}

// Two-step Gibbs sampler of the theory sections: an invariant beta kernel
// for pi(beta | phi) alternated with phi ~ truncated InvGam(N/2, phi_hat(beta) N/2).
inline BetaDraws two_step_gibbs(const ParametricModel& model, const Dataset& data,
                                double truncation_lo, double truncation_hi, int iterations,
                                int burn_in, int beta_steps_per_iter, double phi_init,
                                Rng& rng) {
  if (!(truncation_lo > 0.0) || !(truncation_lo < truncation_hi))
    throw ConfigError("two_step_gibbs: bad truncation interval");
  if (!(phi_init >= truncation_lo) || !(phi_init <= truncation_hi))
    throw ConfigError("two_step_gibbs: phi_init outside the truncation interval");
  const MqleFit fit = fit_mqle(model.family, data);
  double phi = phi_init;
  const Eigen::MatrixXd asymptotic_cov =
      (fit.h_hat * static_cast<double>(data.n)).inverse() * fit.phi_moment;
  detail::AdaptiveRwm rwm(fit.beta, 2.38 * 2.38 / static_cast<double>(fit.beta.size()) *
                                        asymptotic_cov);
  BetaDraws out;
  for (int it = 0; it < iterations; ++it) {
    const auto log_target = [&](const Eigen::VectorXd& b) {
      return log_quasi_posterior(model, data, b, phi);
    };
    double cur = log_target(rwm.current());
    for (int s = 0; s < beta_steps_per_iter; ++s)
      rwm.step(log_target, cur, it < burn_in, rng);
    phi = truncated_inv_gamma_draw(phi_hat_at(model.family, data, rwm.current()), data.n,
                                   truncation_lo, truncation_hi, rng);
    if (it >= burn_in) {
      out.beta.push_back(rwm.current());
      out.phi.push_back(phi);
    }
  }
  out.acceptance_rate = rwm.acceptance_rate();
  return out;
}

// Bayesian-bootstrap Poisson: p ~ Dirichlet(1,...,1), then solve the
// p-weighted Poisson score equation by IRLS.
inline BetaDraws bb_poisson(const Dataset& data, int n_draws, Rng& rng) {
  BetaDraws out;
  const std::vector<double> ones(data.n, 1.0);
  const QuasiFamily family = QuasiFamily::poisson();
  fit_mqle_weighted(family, data, ones);  // validates the design up front
  while (static_cast<int>(out.beta.size()) < n_draws) {
    const std::vector<double> p = rng.dirichlet(ones);
    try {
      out.beta.push_back(fit_mqle_weighted(family, data, p).beta);
    } catch (const NumericError&) {
      ++out.rejected_solves;  // resample p and try again
      if (out.rejected_solves > 100 * n_draws)
        throw NumericError("bb_poisson: IRLS diverged on too many bootstrap draws");
    }
  }
  return out;
}

}  // namespace qlbart
