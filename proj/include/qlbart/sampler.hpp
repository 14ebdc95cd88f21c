#pragma once

// Bayesian backfitting MCMC: one tree at a time conditional on the sum of
// the others (the zeta cache), leaf redraws from the full conditionals,
// hyperparameter updates, multinomial xi augmentation, and the per-sweep
// dispersion update.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qlbart/data.hpp"
#include "qlbart/dispersion.hpp"
#include "qlbart/draws.hpp"
#include "qlbart/ensemble.hpp"
#include "qlbart/errors.hpp"
#include "qlbart/family.hpp"
#include "qlbart/hyper.hpp"
#include "qlbart/leaf_model.hpp"
#include "qlbart/moves.hpp"
#include "qlbart/rng.hpp"

namespace qlbart {

struct ChainConfig {
  int n_trees = 200;
  int iterations = 2000;
  int burn_in = 1000;
  int thin = 1;
  double phi_init = 1.0;
  double kappa_init = 1.5;
  double k_scale = 2.0;
  double alpha_dirichlet = 1.0;
  bool update_split_probs = true;
  bool update_sigma_lambda = true;
  int max_depth = -1;
  int max_cutpoints = 100;
  double tree_gamma = 0.95;
  double tree_beta = 2.0;
  DispersionConfig dispersion;

  void validate() const {
    if (n_trees < 1) throw ConfigError("config: n_trees must be >= 1");
    if (burn_in < 0 || iterations <= burn_in)
      throw ConfigError("config: need iterations > burn_in >= 0");
    if (thin < 1) throw ConfigError("config: thin must be >= 1");
    if (!(phi_init > 0.0)) throw ConfigError("config: phi_init must be > 0");
    if (max_cutpoints < 1) throw ConfigError("config: max_cutpoints must be >= 1");
    dispersion.validate();
  }
};

struct SamplerDiagnostics {
  long proposals = 0;
  long accepts = 0;
  int power_fallback_leaves = 0;
  bool bbq_degenerate = false;
};

struct SamplerState {
  QuasiFamily family;  // internal family: binomial is expanded to K=2 multinomial
  Ensemble ensemble;
  Cutpoints cuts;
  std::vector<double> fit;  // N x K, sum over all trees
  double phi = 1.0;
  LeafPrior leaf_prior;
  std::vector<double> xi;  // multinomial latents
  Rng rng;
  long sweep = 0;
  SamplerDiagnostics diag;

  double kappa() const { return family.kappa; }
};

// Quasi-binomial runs as a K=2 quasi-multinomial: y -> (y, 1-y), n = omega.
inline Dataset expand_binomial(const Dataset& data) {
  Dataset out;
  out.n = data.n;
  out.p = data.p;
  out.k = 2;
  out.x = data.x;
  out.weight = data.weight;
  out.feature_names = data.feature_names;
  out.y.resize(data.n * 2);
  for (std::size_t i = 0; i < data.n; ++i) {
    out.y[2 * i] = data.yval(i);
    out.y[2 * i + 1] = 1.0 - data.yval(i);
  }
  return out;
}

inline double default_sigma_scale(const QuasiFamily& family, int n_trees, double k_scale) {
  const double t = static_cast<double>(n_trees);
  if (family.kind == Family::multinomial) return 3.0 / (k_scale * std::sqrt(2.0 * t));
  return 3.0 / (k_scale * std::sqrt(t));
}

inline SamplerState make_sampler_state(const Dataset& data, const QuasiFamily& family,
                                       const ChainConfig& config, std::uint64_t seed) {
  config.validate();
  data.validate(family);
  SamplerState state;
  state.family = family;
  state.rng = Rng(seed);
  state.cuts = Cutpoints::from_data(data, config.max_cutpoints);
  state.ensemble = Ensemble::root_leaves(config.n_trees, family.dim, data.p);
  state.ensemble.tree_prior.gamma_base = config.tree_gamma;
  state.ensemble.tree_prior.beta_depth = config.tree_beta;
  state.ensemble.tree_prior.max_depth = config.max_depth;
  state.ensemble.sigma_lambda = default_sigma_scale(family, config.n_trees, config.k_scale);
  state.leaf_prior = (family.kind == Family::power)
                         ? LeafPrior{0.0, 0.0, state.ensemble.sigma_lambda, config.k_scale}
                         : leaf_prior_from_sigma(state.ensemble.sigma_lambda, config.k_scale);
  state.fit.assign(data.n * static_cast<std::size_t>(family.dim), 0.0);
  state.phi = config.phi_init;
  if (family.kind == Family::power) state.family.kappa = config.kappa_init;
  if (family.kind == Family::multinomial) state.xi.assign(data.n, 1.0);
  return state;
}

inline void recompute_fit(SamplerState& state, const Dataset& data) {
  const std::size_t k = static_cast<std::size_t>(state.family.dim);
  std::fill(state.fit.begin(), state.fit.end(), 0.0);
  for (std::size_t i = 0; i < data.n; ++i)
    state.ensemble.predict_into(data.row(i), state.fit.data() + i * k);
}

namespace detail {

inline void add_tree_fit(std::vector<double>& fit, const DecisionTree& tree,
                         const std::vector<int>& leaf_of, std::size_t k, double sign) {
  for (std::size_t i = 0; i < leaf_of.size(); ++i) {
    const std::vector<double>& leaf = tree.nodes()[static_cast<std::size_t>(leaf_of[i])].leaf;
    for (std::size_t c = 0; c < k; ++c) fit[i * k + c] += sign * leaf[c];
  }
}

}  // namespace detail

// Metropolis-Hastings update of tree t followed by a leaf redraw from the
// full conditional; the fit cache excludes tree t on entry to the
// likelihood evaluations and includes it again on exit.
inline bool update_tree(SamplerState& state, const Dataset& data, int t) {
  const std::size_t k = static_cast<std::size_t>(state.family.dim);
  DecisionTree& tree = state.ensemble.trees[static_cast<std::size_t>(t)];
  const std::vector<double>* xi = state.xi.empty() ? nullptr : &state.xi;

  std::vector<int> leaf_of = assign_leaves(tree, data);
  detail::add_tree_fit(state.fit, tree, leaf_of, k, -1.0);

  std::vector<LeafStats> stats = leaf_stats(state.family, tree, data, state.fit, state.phi,
                                            state.kappa(), xi, leaf_of);
  MoveProposal proposal = propose_move(tree, state.ensemble.tree_prior,
                                       state.ensemble.split_probs, state.cuts, state.rng);
  const std::vector<int> leaf_of_new = assign_leaves(proposal.tree, data);
  const std::vector<LeafStats> stats_new =
      leaf_stats(state.family, proposal.tree, data, state.fit, state.phi, state.kappa(), xi,
                 leaf_of_new);

  const double log_lik_cur = tree_integrated_log_lik(state.family, tree, stats,
                                                     state.leaf_prior, state.phi,
                                                     &state.diag.power_fallback_leaves);
  const double log_lik_new = tree_integrated_log_lik(state.family, proposal.tree, stats_new,
                                                     state.leaf_prior, state.phi,
                                                     &state.diag.power_fallback_leaves);
  const double log_prior_cur = tree_log_prior(tree, state.ensemble.tree_prior,
                                              state.ensemble.split_probs, state.cuts);
  const double log_prior_new = tree_log_prior(proposal.tree, state.ensemble.tree_prior,
                                              state.ensemble.split_probs, state.cuts);
  const double log_alpha = (log_lik_new + log_prior_new) - (log_lik_cur + log_prior_cur) +
                           proposal.log_proposal_ratio;

  state.diag.proposals += 1;
  bool accepted = false;
  if (std::log(state.rng.uniform()) <= log_alpha) {
    tree = std::move(proposal.tree);
    leaf_of = leaf_of_new;
    stats = stats_new;
    accepted = true;
    state.diag.accepts += 1;
  }

  sample_leaves(state.family, tree, stats, state.leaf_prior, state.phi, state.rng);
  detail::add_tree_fit(state.fit, tree, leaf_of, k, +1.0);
  return accepted;
}

inline void sample_xi(SamplerState& state, const Dataset& data) {
  const std::size_t k = static_cast<std::size_t>(state.family.dim);
  for (std::size_t i = 0; i < data.n; ++i) {
    double rate = 0.0;
    for (std::size_t c = 0; c < k; ++c) rate += std::exp(state.fit[i * k + c]);
    state.xi[i] = state.rng.gamma(data.weight[i] / state.phi, rate);
  }
}

// Current per-observation means from the fit cache.
inline std::vector<double> fitted_means(const SamplerState& state, const Dataset& data) {
  const std::size_t k = static_cast<std::size_t>(state.family.dim);
  std::vector<double> mu(data.n * k);
  if (state.family.kind == Family::multinomial) {
    std::vector<double> row(k);
    for (std::size_t i = 0; i < data.n; ++i) {
      for (std::size_t c = 0; c < k; ++c) row[c] = state.fit[i * k + c];
      const std::vector<double> m = mean_from_r(state.family, row);
      for (std::size_t c = 0; c < k; ++c) mu[i * k + c] = m[c];
    }
  } else {
    for (std::size_t i = 0; i < data.n; ++i)
      mu[i] = mean_from_r(state.family, state.fit[i]);
  }
  return mu;
}

namespace detail {

inline void dispersion_sweep_update(SamplerState& state, const Dataset& data,
                                    const DispersionConfig& cfg) {
  if (cfg.method == DispersionMethod::fixed) return;
  const std::size_t k = static_cast<std::size_t>(state.family.dim);
  const std::vector<double> mu = fitted_means(state, data);

  if (cfg.method == DispersionMethod::eqp) {
    double dev = 0.0;
    if (state.family.kind == Family::multinomial) {
      std::vector<double> yrow(k), murow(k);
      for (std::size_t i = 0; i < data.n; ++i) {
        for (std::size_t c = 0; c < k; ++c) {
          yrow[c] = data.yval(i, c);
          murow[c] = mu[i * k + c];
        }
        dev += data.weight[i] * quasi_deviance(state.family, yrow, murow);
      }
    } else {
      for (std::size_t i = 0; i < data.n; ++i)
        dev += data.weight[i] * quasi_deviance(state.family, data.yval(i), mu[i]);
    }
    state.phi = eqp_update(dev, data.n, cfg.prior_a, cfg.prior_b, state.rng);
    return;
  }

  // PLP and BBQ act on standardized residuals only.
  std::vector<double> z2(data.n);
  std::vector<double> yrow(k), murow(k);
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      yrow[c] = data.yval(i, c);
      murow[c] = mu[i * k + c];
    }
    z2[i] = squared_residual(state.family, yrow, murow, data.weight[i]);
  }

  const bool power_kappa =
      state.family.kind == Family::power && cfg.estimate_kappa;
  std::vector<ResidualTriple> triples;
  if (power_kappa) {
    triples.resize(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
      triples[i] = {data.yval(i), mu[i], data.weight[i]};
  }

  if (cfg.method == DispersionMethod::plp) {
    std::vector<double> z(data.n);
    for (std::size_t i = 0; i < data.n; ++i) z[i] = std::sqrt(z2[i]);
    state.phi = plp_update(z, cfg.prior_a, cfg.prior_b, state.rng);
    if (power_kappa)
      state.family.kappa = plp_kappa_update(triples, state.phi, state.family.kappa,
                                            cfg.kappa_min, cfg.kappa_max, state.rng);
    return;
  }

  // BBQ
  BbqResult res = power_kappa
                      ? bbq_update_kappa(triples, cfg.kappa_min, cfg.kappa_max, state.rng)
                      : bbq_update(z2, state.rng);
  if (res.degenerate) {
    state.diag.bbq_degenerate = true;  // keep the previous positive phi
    return;
  }
  state.phi = res.phi;
  if (power_kappa) state.family.kappa = res.kappa;
}

}  // namespace detail

// One full Gibbs sweep: xi (multinomial) -> trees -> sigma_lambda -> split
// probabilities -> dispersion.
inline void gibbs_sweep(SamplerState& state, const Dataset& data, const ChainConfig& config) {
  if (state.family.kind == Family::multinomial) sample_xi(state, data);

  for (int t = 0; t < static_cast<int>(state.ensemble.trees.size()); ++t)
    update_tree(state, data, t);

  if (config.update_sigma_lambda) {
    std::vector<double> leaf_values;
    for (const DecisionTree& tree : state.ensemble.trees)
      for (const TreeNode& node : tree.nodes())
        if (node.is_leaf())
          leaf_values.insert(leaf_values.end(), node.leaf.begin(), node.leaf.end());
    const double scale =
        default_sigma_scale(state.family, static_cast<int>(state.ensemble.trees.size()),
                            config.k_scale);
    const LeafPriorKind kind = (state.family.kind == Family::power) ? LeafPriorKind::normal
                                                                    : LeafPriorKind::log_gamma;
    const double sigma = sample_sigma_lambda(leaf_values, scale, kind,
                                             state.ensemble.sigma_lambda, state.rng);
    state.ensemble.sigma_lambda = sigma;
    state.leaf_prior = (state.family.kind == Family::power)
                           ? LeafPrior{0.0, 0.0, sigma, config.k_scale}
                           : leaf_prior_from_sigma(sigma, config.k_scale);
  }

  if (config.update_split_probs) {
    const std::vector<int> counts = state.ensemble.split_counts(data.p);
    state.ensemble.split_probs =
        sample_split_probs(counts, config.alpha_dirichlet, state.rng);
  }

  detail::dispersion_sweep_update(state, data, config.dispersion);

  state.sweep += 1;
  if (state.sweep % 50 == 0) recompute_fit(state, data);  // bounds cache drift
}

namespace detail {

// Appends the current fit to the draw record, mapping the internal K=2
// binomial representation back to the scalar parameterization.
inline void record_fit(const SamplerState& state, const Dataset& data, bool binomial_original,
                       const Dataset* test, Draws& draws) {
  const std::size_t k = static_cast<std::size_t>(state.family.dim);
  const auto append_point = [&](const double* r_vec, std::vector<double>& r_out,
                                std::vector<double>& mu_out) {
    if (binomial_original) {
      const double r = r_vec[1] - r_vec[0];  // mu1 = 1 / (1 + e^r)
      r_out.push_back(r);
      mu_out.push_back(1.0 / (1.0 + std::exp(r)));
    } else if (state.family.kind == Family::multinomial) {
      std::vector<double> row(r_vec, r_vec + k);
      const std::vector<double> m = mean_from_r(state.family, row);
      for (std::size_t c = 0; c < k; ++c) {
        r_out.push_back(r_vec[c]);
        mu_out.push_back(m[c]);
      }
    } else {
      r_out.push_back(r_vec[0]);
      mu_out.push_back(mean_from_r(state.family, r_vec[0]));
    }
  };

  for (std::size_t i = 0; i < data.n; ++i)
    append_point(state.fit.data() + i * k, draws.r_train, draws.mu_train);
  if (test != nullptr) {
    std::vector<double> r_vec(k);
    for (std::size_t i = 0; i < test->n; ++i) {
      state.ensemble.predict_into(test->row(i), r_vec.data());
      append_point(r_vec.data(), draws.r_test, draws.mu_test);
    }
  }
}

}  // namespace detail

// Runs burn-in plus retained sweeps and records the draws. The binomial
// family is expanded internally to its exact K=2 multinomial representation;
// recorded fits are mapped back to the scalar mean.
inline Draws run_chain(const Dataset& data_in, const QuasiFamily& family_in,
                       const ChainConfig& config, std::uint64_t seed,
                       const Dataset* test_in = nullptr, int chain_id = 0) {
  config.validate();
  data_in.validate(family_in);

  const bool binomial_original = family_in.kind == Family::binomial;
  const Dataset data = binomial_original ? expand_binomial(data_in) : data_in;
  Dataset test_expanded;
  const Dataset* test = test_in;
  if (binomial_original && test_in != nullptr) {
    test_expanded = expand_binomial(*test_in);
    test = &test_expanded;
  }
  const QuasiFamily family =
      binomial_original ? QuasiFamily::multinomial(2) : family_in;

  SamplerState state = make_sampler_state(data, family, config, seed);

  Draws draws;
  draws.seed = seed;
  draws.chain_id = chain_id;
  draws.n_train = data.n;
  draws.n_test = (test != nullptr) ? test->n : 0;
  draws.k = binomial_original ? 1 : family.dim;

  for (int it = 0; it < config.iterations; ++it) {
    gibbs_sweep(state, data, config);
    if (it < config.burn_in) continue;
    if ((it - config.burn_in) % config.thin != 0) continue;
    draws.phi.push_back(state.phi);
    draws.kappa.push_back(state.kappa());
    draws.sigma_lambda.push_back(state.ensemble.sigma_lambda);
    draws.split_counts.push_back(state.ensemble.split_counts(data.p));
    detail::record_fit(state, data, binomial_original, test, draws);
  }
  return draws;
}

// --- checkpointing ---------------------------------------------------------

inline std::string serialize_checkpoint(const SamplerState& state) {
  std::ostringstream os;
  os << "qlbart-checkpoint 1\n";
  os << "family=" << family_name(state.family.kind) << " kappa="
     << detail::format_double(state.family.kappa) << " k=" << state.family.dim << '\n';
  os << "phi=" << detail::format_double(state.phi) << " sweep=" << state.sweep << '\n';
  os << "xi";
  for (double v : state.xi) os << ' ' << detail::format_double(v);
  os << '\n';
  os << "rng " << state.rng.serialize() << '\n';
  os << serialize_ensemble(state.ensemble);
  return os.str();
}

// Restores a state previously produced by serialize_checkpoint; the training
// data must match the original run (the fit cache and cut grids are rebuilt).
inline SamplerState load_checkpoint(std::istream& in, const Dataset& data_in,
                                    const ChainConfig& config) {
  std::string line;
  if (!std::getline(in, line) || line != "qlbart-checkpoint 1")
    throw ParseError("checkpoint: bad magic");

  SamplerState state;
  if (!std::getline(in, line)) throw ParseError("checkpoint: missing family line");
  {
    std::istringstream ls(line);
    std::string kv;
    std::string fam;
    double kappa = 1.5;
    int k = 1;
    while (ls >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("checkpoint: bad field " + kv);
      const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (key == "family") fam = value;
      else if (key == "kappa") kappa = std::stod(value);
      else if (key == "k") k = std::stoi(value);
      else throw ParseError("checkpoint: unknown field " + key);
    }
    state.family = QuasiFamily(family_from_name(fam), kappa, k);
  }
  if (!std::getline(in, line)) throw ParseError("checkpoint: missing phi line");
  {
    std::istringstream ls(line);
    std::string kv;
    while (ls >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("checkpoint: bad field " + kv);
      const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (key == "phi") state.phi = std::stod(value);
      else if (key == "sweep") state.sweep = std::stol(value);
      else throw ParseError("checkpoint: unknown field " + key);
    }
  }
  if (!std::getline(in, line) || line.substr(0, 2) != "xi")
    throw ParseError("checkpoint: missing xi line");
  {
    std::istringstream ls(line.substr(2));
    double v = 0.0;
    while (ls >> v) state.xi.push_back(v);
  }
  if (!std::getline(in, line) || line.substr(0, 4) != "rng ")
    throw ParseError("checkpoint: missing rng line");
  state.rng.deserialize(line.substr(4));

  state.ensemble = parse_ensemble(in);

  const Dataset data = (state.family.kind == Family::multinomial && data_in.k == 1)
                           ? expand_binomial(data_in)
                           : data_in;
  state.cuts = Cutpoints::from_data(data, config.max_cutpoints);
  rebind_cut_indices(state.ensemble, state.cuts);
  state.leaf_prior =
      (state.family.kind == Family::power)
          ? LeafPrior{0.0, 0.0, state.ensemble.sigma_lambda, config.k_scale}
          : leaf_prior_from_sigma(state.ensemble.sigma_lambda, config.k_scale);
  state.fit.assign(data.n * static_cast<std::size_t>(state.family.dim), 0.0);
  recompute_fit(state, data);
  return state;
}

}  // namespace qlbart
