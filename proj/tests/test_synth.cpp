#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oracles.hpp"
#include "qlbart/synth.hpp"

using namespace qlbart;

TEST_CASE("friedman function at pinned points") {
  CHECK(friedman_r({0.0, 0.7, 0.5, 0.0, 0.0}) == Catch::Approx(0.0).margin(1e-15));
  CHECK(friedman_r({0.5, 1.0, 0.5, 1.0, 1.0}) == Catch::Approx(2.5));
  // symmetric in x1, x2
  CHECK(friedman_r({0.3, 0.8, 0.1, 0.4, 0.9}) ==
        Catch::Approx(friedman_r({0.8, 0.3, 0.1, 0.4, 0.9})));
  CHECK_THROWS_AS(friedman_r(std::vector<double>{0.1, 0.2}), ConfigError);
}

TEST_CASE("generators are deterministic in the seed") {
  const Dataset a = gen_qpois(50, 1.0, 0.5, 3.0, 7);
  const Dataset b = gen_qpois(50, 1.0, 0.5, 3.0, 7);
  const Dataset c = gen_qpois(50, 1.0, 0.5, 3.0, 8);
  CHECK(a.y == b.y);
  CHECK(a.x == b.x);
  CHECK(a.y != c.y);
}

TEST_CASE("quasi-poisson generator has Var = phi mu at fixed x") {
  // hold x fixed by regenerating single-row datasets across seeds is wasteful;
  // instead simulate the outcome mechanism directly through the generator at
  // beta1 = 0 so every row shares mu = e^{beta0}
  const double phi = 3.0, beta0 = 1.2;
  const Dataset data = gen_qpois(100000, beta0, 0.0, phi, 21);
  const double mu = std::exp(beta0);
  CHECK(oracle::mean(data.y) == Catch::Approx(mu).epsilon(0.02));
  CHECK(oracle::variance(data.y) / oracle::mean(data.y) == Catch::Approx(phi).epsilon(0.05));
  // phi = 1 reduces to ordinary Poisson: all outcomes integral
  const Dataset pois = gen_qpois(200, 0.5, 0.4, 1.0, 3);
  for (double y : pois.y) CHECK(y == std::floor(y));
}

TEST_CASE("power grid generator: coefficient norm and variance relation") {
  const Dataset k1 = gen_power_grid(200, 1.0, 1.0, 5);
  CHECK(k1.p == 5);
  // kappa = 1, phi = 1 -> plain Poisson outcomes
  for (double y : k1.y) CHECK(y == std::floor(y));

  // kappa = 2: Var(Y|x)/mu^2 = phi; with a degenerate r this is checkable in
  // aggregate because Y/mu = eps ~ Gam(1/phi, 1/phi) iid
  const double phi = 0.7;
  const Dataset k2 = gen_power_grid(100000, 2.0, phi, 9);
  std::vector<double> eps(k2.n);
  const double coef = 2.0 / std::sqrt(5.0);
  for (std::size_t i = 0; i < k2.n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < 5; ++j) r += coef * k2.xval(i, j);
    eps[i] = k2.y[i] / std::exp(r);
  }
  CHECK(oracle::mean(eps) == Catch::Approx(1.0).epsilon(0.01));
  CHECK(oracle::variance(eps) == Catch::Approx(phi).epsilon(0.03));
}

TEST_CASE("inverse-gamma friedman generator matches its moments") {
  const double phi = 0.5;  // alpha = 4
  const Dataset data = gen_invgamma_friedman(200000, 5, phi, 13);
  // E(Y e^{-r}) = 1 and Var(Y e^{-r}) = phi by the inverse-gamma moments
  std::vector<double> scaled(data.n);
  for (std::size_t i = 0; i < data.n; ++i)
    scaled[i] = data.y[i] / std::exp(friedman_r(data.row(i)));
  CHECK(oracle::mean(scaled) == Catch::Approx(1.0).epsilon(0.01));
  CHECK(oracle::variance(scaled) == Catch::Approx(phi).epsilon(0.05));
}

TEST_CASE("gamma power generator is a quasi-power model with kappa 1.5") {
  const double phi = 2.0;
  const Dataset data = gen_gamma_power(200000, 5, phi, 17);
  // Y e^{-r} has mean 1; Var(Y | x) / mu^{1.5} = phi checked via the scaled
  // second moment: Var(Y e^{-r}) = phi e^{-r/2} integrated over x is awkward,
  // so check at (nearly) fixed r by binning r into a narrow slice
  std::vector<double> slice;
  for (std::size_t i = 0; i < data.n; ++i) {
    const double r = friedman_r(data.row(i));
    if (std::abs(r - 1.5) < 0.02) slice.push_back(data.y[i]);
  }
  REQUIRE(slice.size() > 3000);
  const double mu = std::exp(1.5);
  CHECK(oracle::mean(slice) == Catch::Approx(mu).epsilon(0.03));
  CHECK(oracle::variance(slice) == Catch::Approx(phi * std::pow(mu, 1.5)).epsilon(0.10));
}

TEST_CASE("dirichlet multinomial generator: simplex rows and phi = 1/(1+rho)") {
  const double rho = 0.5;  // phi = 2/3
  const Dataset data = gen_dirichlet_multinomial(150000, rho, 23);
  REQUIRE(data.k == 3);
  for (std::size_t i = 0; i < 50; ++i) {
    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c) total += data.yval(i, c);
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
  }
  // Var(Y_1 | x) = phi mu_1 (1 - mu_1); standardize and pool across x
  std::vector<double> z2(data.n);
  double mu[3];
  for (std::size_t i = 0; i < data.n; ++i) {
    dirichlet_multinomial_means(data.row(i), mu);
    const double d = data.yval(i, 0) - mu[0];
    z2[i] = d * d / (mu[0] * (1.0 - mu[0]));
  }
  CHECK(oracle::mean(z2) == Catch::Approx(1.0 / (1.0 + rho)).epsilon(0.03));
}

TEST_CASE("scenario spec validation and dispatch") {
  ScenarioSpec spec;
  spec.scenario = Scenario::power_grid;
  spec.kappa = 1.7;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.kappa = 2.0;
  spec.n = 40;
  CHECK(generate(spec).n == 40);
  CHECK(scenario_from_name("gamma_power") == Scenario::gamma_power);
  CHECK_THROWS_AS(scenario_from_name("nope"), ConfigError);
}
