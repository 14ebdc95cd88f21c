#pragma once

// Topology proposal kernel: GROW / PRUNE / CHANGE with exact proposal
// density ratios. GROW and PRUNE are mutually reverse; CHANGE keeps the
// topology and redraws one decision rule.

#include <cmath>
#include <vector>

#include "qlbart/rng.hpp"
#include "qlbart/tree.hpp"
#include "qlbart/tree_prior.hpp"

namespace qlbart {

enum class MoveTag { grow, prune, change };

struct MoveProposal {
  DecisionTree tree;
  double log_proposal_ratio = 0.0;  // log Q(T' -> T) - log Q(T -> T')
  MoveTag tag = MoveTag::grow;
};

namespace detail {

struct MoveProbs {
  double grow = 0.0, prune = 0.0, change = 0.0;
};

// Base weights 0.3 / 0.3 / 0.4 renormalized over the feasible set.
inline MoveProbs move_probs(const DecisionTree& tree, const TreePrior& prior) {
  const bool can_grow = !tree.growable_leaves(prior.max_depth).empty();
  const bool can_prune = !tree.nogs().empty();
  const bool can_change = !tree.internals().empty();
  MoveProbs w;
  w.grow = can_grow ? 0.3 : 0.0;
  w.prune = can_prune ? 0.3 : 0.0;
  w.change = can_change ? 0.4 : 0.0;
  const double total = w.grow + w.prune + w.change;
  w.grow /= total;
  w.prune /= total;
  w.change /= total;
  return w;
}

}  // namespace detail

inline MoveProposal propose_move(const DecisionTree& tree, const TreePrior& prior,
                                 const std::vector<double>& split_probs, const Cutpoints& cuts,
                                 Rng& rng) {
  const detail::MoveProbs probs = detail::move_probs(tree, prior);
  const double u = rng.uniform();
  MoveProposal out;

  if (u < probs.grow) {
    out.tag = MoveTag::grow;
    const std::vector<int> leaves = tree.growable_leaves(prior.max_depth);
    const int leaf = leaves[rng.uniform_int(leaves.size())];
    const std::size_t j = rng.categorical(split_probs);
    const std::size_t c = rng.uniform_int(cuts.size(j));
    out.tree = tree.with_grow(leaf, static_cast<int>(j), static_cast<int>(c), cuts.grid[j][c]);
    const double log_forward = std::log(probs.grow) - std::log(double(leaves.size())) +
                               std::log(split_probs[j]) - std::log(double(cuts.size(j)));
    const detail::MoveProbs rev = detail::move_probs(out.tree, prior);
    const double log_reverse =
        std::log(rev.prune) - std::log(double(out.tree.nogs().size()));
    out.log_proposal_ratio = log_reverse - log_forward;
    return out;
  }

  if (u < probs.grow + probs.prune) {
    out.tag = MoveTag::prune;
    const std::vector<int> nogs = tree.nogs();
    const int nog = nogs[rng.uniform_int(nogs.size())];
    const TreeNode& victim = tree.nodes()[static_cast<std::size_t>(nog)];
    const std::size_t j = static_cast<std::size_t>(victim.feature);
    out.tree = tree.with_prune(nog);
    const double log_forward = std::log(probs.prune) - std::log(double(nogs.size()));
    const detail::MoveProbs rev = detail::move_probs(out.tree, prior);
    const double log_reverse =
        std::log(rev.grow) -
        std::log(double(out.tree.growable_leaves(prior.max_depth).size())) +
        std::log(split_probs[j]) - std::log(double(cuts.size(j)));
    out.log_proposal_ratio = log_reverse - log_forward;
    return out;
  }

  out.tag = MoveTag::change;
  const std::vector<int> internals = tree.internals();
  const int target = internals[rng.uniform_int(internals.size())];
  const TreeNode& old_node = tree.nodes()[static_cast<std::size_t>(target)];
  const std::size_t j_old = static_cast<std::size_t>(old_node.feature);
  const std::size_t j_new = rng.categorical(split_probs);
  const std::size_t c_new = rng.uniform_int(cuts.size(j_new));
  out.tree =
      tree.with_change(target, static_cast<int>(j_new), static_cast<int>(c_new),
                       cuts.grid[j_new][c_new]);
  // node counts are unchanged, so only the rule densities survive
  out.log_proposal_ratio = (std::log(split_probs[j_old]) - std::log(double(cuts.size(j_old)))) -
                           (std::log(split_probs[j_new]) - std::log(double(cuts.size(j_new))));
  return out;
}

}  // namespace qlbart
