#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qlbart {

// Retained MCMC output of one chain. Fit matrices are stored flattened as
// iteration-major [iter][obs][category].
struct Draws {
  std::vector<double> phi;
  std::vector<double> kappa;
  std::vector<double> sigma_lambda;
  std::vector<std::vector<int>> split_counts;  // per iteration, one count per feature

  std::size_t n_train = 0;
  std::size_t n_test = 0;
  int k = 1;
  std::vector<double> r_train;
  std::vector<double> mu_train;
  std::vector<double> r_test;
  std::vector<double> mu_test;

  std::uint64_t seed = 0;
  std::string config_hash;
  int chain_id = 0;

  std::size_t n_iters() const { return phi.size(); }

  double r_at(std::size_t iter, std::size_t i, std::size_t c = 0) const {
    return r_train[(iter * n_train + i) * static_cast<std::size_t>(k) + c];
  }
  double mu_at(std::size_t iter, std::size_t i, std::size_t c = 0) const {
    return mu_train[(iter * n_train + i) * static_cast<std::size_t>(k) + c];
  }
  double mu_test_at(std::size_t iter, std::size_t i, std::size_t c = 0) const {
    return mu_test[(iter * n_test + i) * static_cast<std::size_t>(k) + c];
  }
};

}  // namespace qlbart
