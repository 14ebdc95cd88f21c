#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qlbart/rng.hpp"
#include "qlbart/special.hpp"

using namespace qlbart;

TEST_CASE("seeded streams are reproducible and serializable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());

  Rng c(7);
  for (int i = 0; i < 13; ++i) c.gamma(2.5, 1.0);
  const std::string snapshot = c.serialize();
  std::vector<double> tail;
  for (int i = 0; i < 50; ++i) tail.push_back(c.normal());
  Rng d(0);
  d.deserialize(snapshot);
  for (int i = 0; i < 50; ++i) REQUIRE(d.normal() == tail[static_cast<std::size_t>(i)]);
}

TEST_CASE("normal and gamma moments") {
  Rng rng(123);
  const int n = 200000;
  std::vector<double> z(n), g(n);
  for (int i = 0; i < n; ++i) {
    z[static_cast<std::size_t>(i)] = rng.normal();
    g[static_cast<std::size_t>(i)] = rng.gamma(3.5, 2.0);
  }
  const double se_z = 1.0 / std::sqrt(n);
  CHECK(std::abs(oracle::mean(z)) < 4.0 * se_z);
  CHECK(oracle::variance(z) == Catch::Approx(1.0).epsilon(0.02));
  // Gam(3.5, rate 2): mean 1.75, var 0.875
  CHECK(oracle::mean(g) == Catch::Approx(1.75).epsilon(0.01));
  CHECK(oracle::variance(g) == Catch::Approx(0.875).epsilon(0.03));
}

TEST_CASE("gamma with small shape") {
  Rng rng(5);
  const int n = 200000;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = rng.gamma(0.3, 1.0);
  CHECK(oracle::mean(g) == Catch::Approx(0.3).epsilon(0.02));
  CHECK(oracle::variance(g) == Catch::Approx(0.3).epsilon(0.03));
  // distribution check against the gamma CDF
  const double p = oracle::ks_test_pvalue(
      std::vector<double>(g.begin(), g.begin() + 5000),
      [](double x) { return gamma_p(0.3, x); });
  CHECK(p > 0.01);
}

TEST_CASE("poisson splitting stays exact for large means") {
  Rng rng(11);
  for (double mean : {0.5, 7.0, 120.0}) {
    const int n = 100000;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
      y[static_cast<std::size_t>(i)] = static_cast<double>(rng.poisson(mean));
    CHECK(oracle::mean(y) == Catch::Approx(mean).epsilon(0.02));
    CHECK(oracle::variance(y) == Catch::Approx(mean).epsilon(0.03));
  }
}

TEST_CASE("dirichlet draws live on the simplex with the right mean") {
  Rng rng(9);
  const std::vector<double> alpha = {1.0, 2.0, 5.0};
  std::vector<double> first(20000);
  for (std::size_t i = 0; i < first.size(); ++i) {
    const std::vector<double> d = rng.dirichlet(alpha);
    double total = 0.0;
    for (double v : d) total += v;
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
    first[i] = d[0];
  }
  CHECK(oracle::mean(first) == Catch::Approx(1.0 / 8.0).epsilon(0.03));
}

TEST_CASE("half-cauchy median equals the scale") {
  Rng rng(3);
  std::vector<double> draws(100001);
  for (double& v : draws) v = rng.half_cauchy(2.5);
  std::sort(draws.begin(), draws.end());
  CHECK(draws[draws.size() / 2] == Catch::Approx(2.5).epsilon(0.03));
}

TEST_CASE("categorical follows the weights") {
  Rng rng(17);
  const std::vector<double> w = {0.2, 0.5, 0.3};
  std::vector<long> counts(3, 0);
  const long n = 100000;
  for (long i = 0; i < n; ++i) counts[rng.categorical(w)] += 1;
  CHECK(oracle::chi2_gof_pvalue(counts, w, n) > 0.001);
}
