#pragma once

// Branching-process prior over tree topologies plus the Dirichlet
// splitting-rule prior over features and a uniform grid prior over cutpoints.

#include <cmath>
#include <limits>
#include <vector>

#include "qlbart/rng.hpp"
#include "qlbart/tree.hpp"

namespace qlbart {

struct TreePrior {
  double gamma_base = 0.95;  // P(split at depth d) = gamma_base * (1+d)^-beta_depth
  double beta_depth = 2.0;
  int max_depth = -1;  // negative = unbounded; otherwise split prob 0 at max_depth

  double split_prob(int depth) const {
    if (max_depth >= 0 && depth >= max_depth) return 0.0;
    return gamma_base * std::pow(1.0 + depth, -beta_depth);
  }
};

// log pi(T) = sum_internal log[p_split(d) * s_j / G_j] + sum_leaf log[1 - p_split(d)].
inline double tree_log_prior(const DecisionTree& tree, const TreePrior& prior,
                             const std::vector<double>& split_probs, const Cutpoints& cuts) {
  double lp = 0.0;
  for (const TreeNode& node : tree.nodes()) {
    const double ps = prior.split_prob(node.depth);
    if (node.is_leaf()) {
      lp += std::log1p(-ps);
    } else {
      if (ps <= 0.0) return -std::numeric_limits<double>::infinity();
      lp += std::log(ps) + std::log(split_probs[static_cast<std::size_t>(node.feature)]) -
            std::log(static_cast<double>(cuts.size(static_cast<std::size_t>(node.feature))));
    }
  }
  return lp;
}

namespace detail {
inline int sample_subtree_from_prior(std::vector<TreeNode>& nodes, int depth,
                                     const TreePrior& prior,
                                     const std::vector<double>& split_probs,
                                     const Cutpoints& cuts, int leaf_dim, Rng& rng) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  nodes[id].depth = depth;
  if (rng.uniform() < prior.split_prob(depth)) {
    const std::size_t j = rng.categorical(split_probs);
    const std::size_t c = rng.uniform_int(cuts.size(j));
    nodes[id].feature = static_cast<int>(j);
    nodes[id].cut_index = static_cast<int>(c);
    nodes[id].cutpoint = cuts.grid[j][c];
    const int l =
        sample_subtree_from_prior(nodes, depth + 1, prior, split_probs, cuts, leaf_dim, rng);
    const int r =
        sample_subtree_from_prior(nodes, depth + 1, prior, split_probs, cuts, leaf_dim, rng);
    nodes[id].left = l;
    nodes[id].right = r;
  } else {
    nodes[id].leaf.assign(static_cast<std::size_t>(leaf_dim), 0.0);
  }
  return id;
}
}  // namespace detail

// Forward simulation from the branching-process prior (used for prior
// predictive checks; chains are initialized at root-only trees).
inline DecisionTree sample_tree_from_prior(const TreePrior& prior,
                                           const std::vector<double>& split_probs,
                                           const Cutpoints& cuts, int leaf_dim, Rng& rng) {
  DecisionTree tree = DecisionTree::root_leaf(leaf_dim);
  tree.nodes().clear();
  detail::sample_subtree_from_prior(tree.nodes(), 0, prior, split_probs, cuts, leaf_dim, rng);
  return tree;
}

// Dirichlet(alpha/P + counts) update for the splitting probabilities.
inline std::vector<double> sample_split_probs(const std::vector<int>& split_counts,
                                              double alpha_dirichlet, Rng& rng) {
  std::vector<double> conc(split_counts.size());
  const double base = alpha_dirichlet / static_cast<double>(split_counts.size());
  for (std::size_t j = 0; j < conc.size(); ++j) conc[j] = base + split_counts[j];
  return rng.dirichlet(conc);
}

}  // namespace qlbart
