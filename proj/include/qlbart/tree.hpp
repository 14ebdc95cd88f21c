#pragma once

// Decision trees with axis-aligned rules (left iff x_j <= c) and K-vector
// leaf values, stored as an index arena with node 0 as the root.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qlbart/data.hpp"
#include "qlbart/errors.hpp"

namespace qlbart {

// Per-feature grid of candidate cutpoints (empirical quantiles of the
// training data, at most max_cuts per feature, deduplicated).
struct Cutpoints {
  std::vector<std::vector<double>> grid;  // one sorted vector per feature

  static Cutpoints from_data(const Dataset& data, int max_cuts = 100) {
    Cutpoints cuts;
    cuts.grid.resize(data.p);
    std::vector<double> column(data.n);
    for (std::size_t j = 0; j < data.p; ++j) {
      for (std::size_t i = 0; i < data.n; ++i) column[i] = data.xval(i, j);
      std::sort(column.begin(), column.end());
      std::vector<double>& g = cuts.grid[j];
      const int m = std::min<int>(max_cuts, static_cast<int>(data.n));
      for (int l = 0; l < m; ++l) {
        const double q = (l + 1.0) / (m + 1.0);
        const double v = column[static_cast<std::size_t>(q * (data.n - 1))];
        if (g.empty() || v > g.back()) g.push_back(v);
      }
      if (g.empty()) g.push_back(column.empty() ? 0.0 : column[0]);
    }
    return cuts;
  }

  std::size_t size(std::size_t feature) const { return grid[feature].size(); }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  int cut_index = -1;
  double cutpoint = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;
  std::vector<double> leaf;  // size K at leaves, empty at internal nodes

  bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
 public:
  static DecisionTree root_leaf(int k) {
    DecisionTree t;
    TreeNode root;
    root.leaf.assign(static_cast<std::size_t>(k), 0.0);
    t.nodes_.push_back(std::move(root));
    return t;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }
  int leaf_dim() const {
    for (const TreeNode& n : nodes_)
      if (n.is_leaf()) return static_cast<int>(n.leaf.size());
    return 1;
  }

  int leaf_for(const double* x) const {
    int id = 0;
    while (!nodes_[id].is_leaf())
      id = (x[nodes_[id].feature] <= nodes_[id].cutpoint) ? nodes_[id].left : nodes_[id].right;
    return id;
  }

  std::vector<int> leaves() const { return collect([](const TreeNode& n) { return n.is_leaf(); }); }
  std::vector<int> internals() const {
    return collect([](const TreeNode& n) { return !n.is_leaf(); });
  }
  // Internal nodes whose children are both leaves (prunable).
  std::vector<int> nogs() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      const TreeNode& n = nodes_[i];
      if (!n.is_leaf() && nodes_[n.left].is_leaf() && nodes_[n.right].is_leaf())
        out.push_back(i);
    }
    return out;
  }
  std::vector<int> growable_leaves(int max_depth) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
      if (nodes_[i].is_leaf() && (max_depth < 0 || nodes_[i].depth < max_depth))
        out.push_back(i);
    return out;
  }

  int depth() const {
    int d = 0;
    for (const TreeNode& n : nodes_) d = std::max(d, n.depth);
    return d;
  }

  void add_split_counts(std::vector<int>& counts) const {
    for (const TreeNode& n : nodes_)
      if (!n.is_leaf()) counts[static_cast<std::size_t>(n.feature)] += 1;
  }

  // Structural copies with one modification applied; proposals never mutate
  // the current tree in place.
  DecisionTree with_grow(int leaf_id, int feature, int cut_index, double cutpoint) const {
    DecisionTree out;
    copy_subtree(0, -1, out, leaf_id, feature, cut_index, cutpoint, GROW);
    return out;
  }
  DecisionTree with_prune(int nog_id) const {
    DecisionTree out;
    copy_subtree(0, -1, out, nog_id, 0, 0, 0.0, PRUNE);
    return out;
  }
  DecisionTree with_change(int internal_id, int feature, int cut_index, double cutpoint) const {
    DecisionTree out;
    copy_subtree(0, -1, out, internal_id, feature, cut_index, cutpoint, CHANGE);
    return out;
  }

 private:
  enum Mod { GROW, PRUNE, CHANGE };

  template <class Pred>
  std::vector<int> collect(Pred pred) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
      if (pred(nodes_[i])) out.push_back(i);
    return out;
  }

  int copy_subtree(int src_id, int parent_depth, DecisionTree& dst, int target, int feature,
                   int cut_index, double cutpoint, Mod mod) const {
    const TreeNode& src = nodes_[src_id];
    const int my_depth = parent_depth + 1;
    const int my_id = static_cast<int>(dst.nodes_.size());
    dst.nodes_.emplace_back();
    dst.nodes_[my_id].depth = my_depth;
    const int k = leaf_dim();

    if (src_id == target && mod == GROW) {
      TreeNode& me = dst.nodes_[my_id];
      me.feature = feature;
      me.cut_index = cut_index;
      me.cutpoint = cutpoint;
      const int l = static_cast<int>(dst.nodes_.size());
      dst.nodes_.emplace_back();
      dst.nodes_[l].depth = my_depth + 1;
      dst.nodes_[l].leaf.assign(static_cast<std::size_t>(k), 0.0);
      const int r = static_cast<int>(dst.nodes_.size());
      dst.nodes_.emplace_back();
      dst.nodes_[r].depth = my_depth + 1;
      dst.nodes_[r].leaf.assign(static_cast<std::size_t>(k), 0.0);
      dst.nodes_[my_id].left = l;
      dst.nodes_[my_id].right = r;
      return my_id;
    }
    if (src_id == target && mod == PRUNE) {
      dst.nodes_[my_id].leaf.assign(static_cast<std::size_t>(k), 0.0);
      return my_id;
    }
    if (src.is_leaf()) {
      dst.nodes_[my_id].leaf = src.leaf;
      return my_id;
    }
    {
      TreeNode& me = dst.nodes_[my_id];
      if (src_id == target && mod == CHANGE) {
        me.feature = feature;
        me.cut_index = cut_index;
        me.cutpoint = cutpoint;
      } else {
        me.feature = src.feature;
        me.cut_index = src.cut_index;
        me.cutpoint = src.cutpoint;
      }
    }
    const int l = copy_subtree(src.left, my_depth, dst, target, feature, cut_index, cutpoint, mod);
    const int r = copy_subtree(src.right, my_depth, dst, target, feature, cut_index, cutpoint, mod);
    dst.nodes_[my_id].left = l;
    dst.nodes_[my_id].right = r;
    return my_id;
  }

  std::vector<TreeNode> nodes_;
};

}  // namespace qlbart
