#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oracles.hpp"
#include "qlbart/family.hpp"
#include "qlbart/rng.hpp"

using namespace qlbart;

TEST_CASE("variance functions match the model catalog") {
  CHECK(variance_function(QuasiFamily::poisson(), 3.0) == 3.0);
  CHECK(variance_function(QuasiFamily::gamma(), 3.0) == 9.0);
  CHECK(variance_function(QuasiFamily::power(2.0), 3.0) ==
        Catch::Approx(variance_function(QuasiFamily::gamma(), 3.0)));
  CHECK(variance_function(QuasiFamily::power(1.5), 4.0) == Catch::Approx(8.0));
  CHECK(variance_function(QuasiFamily::binomial(), 0.25) == Catch::Approx(0.1875));

  const std::vector<double> v =
      variance_matrix(QuasiFamily::multinomial(2), {0.5, 0.5});
  CHECK(v[0] == Catch::Approx(0.25));
  CHECK(v[1] == Catch::Approx(-0.25));
  CHECK(v[2] == Catch::Approx(-0.25));
  CHECK(v[3] == Catch::Approx(0.25));

  CHECK_THROWS_AS(variance_function(QuasiFamily::poisson(), 0.0), std::domain_error);
  CHECK_THROWS_AS(variance_function(QuasiFamily::binomial(), 1.0), std::domain_error);
}

TEST_CASE("quasi-deviance closed forms at pinned points") {
  CHECK(quasi_deviance(QuasiFamily::poisson(), 2.0, 2.0) == 0.0);
  CHECK(quasi_deviance(QuasiFamily::poisson(), 2.0, 1.0) ==
        Catch::Approx(2.0 * (2.0 * std::log(2.0) - 1.0)).epsilon(1e-14));
  CHECK(quasi_deviance(QuasiFamily::gamma(), 2.0, 1.0) ==
        Catch::Approx(2.0 * (1.0 - std::log(2.0))).epsilon(1e-14));
  // power kappa = 1.5 at (2, 1): 2 int_1^2 (2-t) t^{-1.5} dt = 12 - 8 sqrt(2)
  CHECK(quasi_deviance(QuasiFamily::power(1.5), 2.0, 1.0) ==
        Catch::Approx(12.0 - 8.0 * std::sqrt(2.0)).epsilon(1e-13));
  const double by_quadrature = oracle::deviance_by_quadrature(
      [](double t) { return std::pow(t, 1.5); }, 2.0, 1.0);
  CHECK(quasi_deviance(QuasiFamily::power(1.5), 2.0, 1.0) ==
        Catch::Approx(by_quadrature).epsilon(1e-9));

  // binomial boundary convention 0 log 0 = 0
  CHECK(std::isfinite(quasi_deviance(QuasiFamily::binomial(), 0.0, 0.3)));
  CHECK(std::isfinite(quasi_deviance(QuasiFamily::binomial(), 1.0, 0.3)));
  CHECK(quasi_deviance(QuasiFamily::binomial(), 0.0, 0.3) ==
        Catch::Approx(-2.0 * std::log(0.7)).epsilon(1e-14));
}

TEST_CASE("closed-form deviances equal quadrature on random in-domain pairs") {
  Rng rng(2024);
  int checked = 0;
  while (checked < 100) {
    const int which = static_cast<int>(rng.uniform_int(4));
    QuasiFamily family;
    double y = 0.0, mu = 0.0;
    std::function<double(double)> v;
    switch (which) {
      case 0:
        family = QuasiFamily::poisson();
        y = rng.uniform(0.2, 8.0);
        mu = rng.uniform(0.2, 8.0);
        v = [](double t) { return t; };
        break;
      case 1:
        family = QuasiFamily::gamma();
        y = rng.uniform(0.2, 8.0);
        mu = rng.uniform(0.2, 8.0);
        v = [](double t) { return t * t; };
        break;
      case 2: {
        family = QuasiFamily::binomial();
        y = rng.uniform(0.05, 0.95);
        mu = rng.uniform(0.05, 0.95);
        v = [](double t) { return t * (1.0 - t); };
        break;
      }
      default: {
        const double kappa = rng.uniform(0.5, 3.0);
        family = QuasiFamily::power(kappa);
        y = rng.uniform(0.2, 8.0);
        mu = rng.uniform(0.2, 8.0);
        v = [kappa](double t) { return std::pow(t, kappa); };
        break;
      }
    }
    const double closed = quasi_deviance(family, y, mu);
    const double quad = oracle::deviance_by_quadrature(v, y, mu);
    REQUIRE(closed == Catch::Approx(quad).epsilon(1e-6).margin(1e-10));
    REQUIRE(closed >= 0.0);
    ++checked;
  }
}

TEST_CASE("deviance is zero only at y = mu") {
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    const double mu = rng.uniform(0.3, 4.0);
    const double y = mu + rng.uniform(0.05, 1.0);
    CHECK(quasi_deviance(QuasiFamily::poisson(), y, mu) > 0.0);
    CHECK(quasi_deviance(QuasiFamily::gamma(), y, mu) > 0.0);
    CHECK(quasi_deviance(QuasiFamily::poisson(), mu, mu) == 0.0);
  }
}

TEST_CASE("power deviance is continuous at the removable exponents") {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const double y = rng.uniform(0.3, 5.0), mu = rng.uniform(0.3, 5.0);
    const double d_pois = quasi_deviance(QuasiFamily::poisson(), y, mu);
    const double d_gam = quasi_deviance(QuasiFamily::gamma(), y, mu);
    CHECK(std::abs(quasi_deviance(QuasiFamily::power(1.0 + 1e-6), y, mu) - d_pois) < 1e-4);
    CHECK(std::abs(quasi_deviance(QuasiFamily::power(1.0 - 1e-6), y, mu) - d_pois) < 1e-4);
    CHECK(std::abs(quasi_deviance(QuasiFamily::power(2.0 + 1e-6), y, mu) - d_gam) < 1e-4);
    CHECK(std::abs(quasi_deviance(QuasiFamily::power(2.0 - 1e-6), y, mu) - d_gam) < 1e-4);
  }
}

TEST_CASE("score identity: d/dmu of -D/2 equals (y - mu) / V(mu)") {
  Rng rng(13);
  const QuasiFamily families[] = {QuasiFamily::poisson(), QuasiFamily::gamma(),
                                  QuasiFamily::binomial(), QuasiFamily::power(1.4)};
  for (const QuasiFamily& family : families) {
    for (int i = 0; i < 25; ++i) {
      const bool binom = family.kind == Family::binomial;
      const double y = binom ? rng.uniform(0.1, 0.9) : rng.uniform(0.5, 4.0);
      const double mu = binom ? rng.uniform(0.15, 0.85) : rng.uniform(0.5, 4.0);
      const double h = 1e-6 * std::max(1.0, std::abs(mu));
      const double fd = -(quasi_deviance(family, y, mu + h) -
                          quasi_deviance(family, y, mu - h)) / (4.0 * h);
      const double analytic = (y - mu) / variance_function(family, mu);
      REQUIRE(fd == Catch::Approx(analytic).epsilon(1e-5).margin(1e-6));
    }
  }
}

TEST_CASE("inverse links") {
  CHECK(mean_from_r(QuasiFamily::binomial(), 0.0) == 0.5);
  CHECK(mean_from_r(QuasiFamily::gamma(), 1.0) == Catch::Approx(std::exp(-1.0)));
  CHECK(mean_from_r(QuasiFamily::poisson(), 1.3) == Catch::Approx(std::exp(1.3)));
  const std::vector<double> mu = mean_from_r(QuasiFamily::multinomial(3), {0.0, 0.0, 0.0});
  for (double m : mu) CHECK(m == Catch::Approx(1.0 / 3.0));
  // overflow-safe softmax
  const std::vector<double> big = mean_from_r(QuasiFamily::multinomial(2), {1000.0, 999.0});
  CHECK(big[0] == Catch::Approx(1.0 / (1.0 + std::exp(-1.0))));
  // r_from_mean inverts
  for (double r : {-2.0, 0.0, 1.7}) {
    CHECK(r_from_mean(QuasiFamily::poisson(), mean_from_r(QuasiFamily::poisson(), r)) ==
          Catch::Approx(r).margin(1e-12));
    CHECK(r_from_mean(QuasiFamily::gamma(), mean_from_r(QuasiFamily::gamma(), r)) ==
          Catch::Approx(r).margin(1e-12));
    CHECK(r_from_mean(QuasiFamily::binomial(), mean_from_r(QuasiFamily::binomial(), r)) ==
          Catch::Approx(r).margin(1e-12));
  }
}

TEST_CASE("standardized residuals") {
  CHECK(standardized_residual(QuasiFamily::poisson(), 3.0, 3.0, 1.0) == 0.0);
  CHECK(standardized_residual(QuasiFamily::poisson(), 4.0, 1.0, 1.0) == Catch::Approx(3.0));
  CHECK(standardized_residual(QuasiFamily::gamma(), 4.0, 2.0, 4.0) == Catch::Approx(2.0));
  CHECK_THROWS_AS(standardized_residual(QuasiFamily::poisson(), 1.0, -1.0, 1.0),
                  std::domain_error);
}

TEST_CASE("moment estimator of phi equals the naive loop") {
  // zero residuals
  CHECK(moment_estimator_phi(QuasiFamily::poisson(), {1.0, 2.0}, {1.0, 2.0}, {1.0, 1.0}, 0) ==
        0.0);
  // hand case: N=3, P=1, y=(1,2,3), mu=(1,1,1) -> (0+1+4)/2
  CHECK(moment_estimator_phi(QuasiFamily::poisson(), {1.0, 2.0, 3.0}, {1.0, 1.0, 1.0},
                             {1.0, 1.0, 1.0}, 1) == Catch::Approx(2.5));
  CHECK_THROWS_AS(moment_estimator_phi(QuasiFamily::poisson(), {1.0}, {1.0}, {1.0}, 1),
                  std::domain_error);

  Rng rng(55);
  std::vector<double> y(40), mu(40), w(40);
  for (std::size_t i = 0; i < y.size(); ++i) {
    mu[i] = rng.uniform(0.5, 4.0);
    y[i] = mu[i] + rng.normal() * 0.3;
    w[i] = rng.uniform(0.5, 2.0);
  }
  double naive = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) naive += w[i] * (y[i] - mu[i]) * (y[i] - mu[i]) / mu[i];
  naive /= (40.0 - 3.0);
  CHECK(moment_estimator_phi(QuasiFamily::poisson(), y, mu, w, 3) ==
        Catch::Approx(naive).epsilon(1e-14));
}

TEST_CASE("multinomial moment estimator is unbiased under multinomial sampling") {
  // z ~ Multinomial(n, mu), y = z / n has phi = 1
  Rng rng(2211);
  const QuasiFamily family = QuasiFamily::multinomial(3);
  const int n_datasets = 400, n_obs = 25, count = 6;
  std::vector<double> estimates;
  for (int d = 0; d < n_datasets; ++d) {
    std::vector<std::vector<double>> y(n_obs), mu(n_obs);
    std::vector<double> w(n_obs, static_cast<double>(count));
    for (int i = 0; i < n_obs; ++i) {
      std::vector<double> r = {rng.normal(), rng.normal(), rng.normal()};
      mu[i] = mean_from_r(family, r);
      std::vector<double> z(3, 0.0);
      for (int c = 0; c < count; ++c) z[rng.categorical(mu[i])] += 1.0;
      y[i] = {z[0] / count, z[1] / count, z[2] / count};
    }
    estimates.push_back(moment_estimator_phi(family, y, mu, w));
  }
  const double se = std::sqrt(oracle::variance(estimates) / n_datasets);
  CHECK(std::abs(oracle::mean(estimates) - 1.0) < std::max(3.0 * se, 0.02));
}

TEST_CASE("leaf prior moment matching") {
  // trigamma(1) = pi^2/6, digamma(1) = -euler_gamma
  const LeafPrior unit = leaf_prior_from_sigma(std::sqrt(M_PI * M_PI / 6.0));
  CHECK(unit.a == Catch::Approx(1.0).epsilon(1e-10));
  CHECK(unit.b == Catch::Approx(0.56145948356688517).epsilon(1e-10));

  for (double sigma : {1e-3, 0.05, 0.1060660171779821, 1.0, 31.6}) {
    const LeafPrior prior = leaf_prior_from_sigma(sigma);
    CHECK(trigamma(prior.a) == Catch::Approx(sigma * sigma).epsilon(1e-10));
    CHECK(digamma(prior.a) - std::log(prior.b) == Catch::Approx(0.0).margin(1e-10));
  }

  // Monte Carlo: log G, G ~ Gam(a, b) has mean 0 and variance sigma^2
  const double sigma = 3.0 / (2.0 * std::sqrt(200.0));
  const LeafPrior prior = leaf_prior_from_sigma(sigma);
  Rng rng(99);
  const int n = 1000000;
  std::vector<double> draws(n);
  for (double& v : draws) v = rng.log_gamma_draw(prior.a, prior.b);
  const double se_mean = sigma / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(oracle::mean(draws)) < 3.0 * se_mean);
  CHECK(oracle::variance(draws) == Catch::Approx(sigma * sigma).epsilon(0.01));
}

TEST_CASE("multinomial quasi-deviance matches the kl form and is nonnegative") {
  const QuasiFamily family = QuasiFamily::multinomial(3);
  const std::vector<double> y = {0.2, 0.5, 0.3};
  CHECK(quasi_deviance(family, y, y) == Catch::Approx(0.0).margin(1e-14));
  const std::vector<double> mu = {0.3, 0.3, 0.4};
  double kl = 0.0;
  for (int c = 0; c < 3; ++c) kl += y[static_cast<std::size_t>(c)] *
      std::log(y[static_cast<std::size_t>(c)] / mu[static_cast<std::size_t>(c)]);
  CHECK(quasi_deviance(family, y, mu) == Catch::Approx(2.0 * kl));
  CHECK(quasi_deviance(family, {0.0, 0.5, 0.5}, mu) ==
        Catch::Approx(2.0 * (0.5 * std::log(0.5 / 0.3) + 0.5 * std::log(0.5 / 0.4))));
}
