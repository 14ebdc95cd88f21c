#pragma once

// Sum-of-trees ensemble: r(x) = sum_t Tree(x; T_t, M_t), plus the
// line-oriented text serialization used for checkpoint/restore.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "qlbart/errors.hpp"
#include "qlbart/tree.hpp"
#include "qlbart/tree_prior.hpp"

namespace qlbart {

struct Ensemble {
  std::vector<DecisionTree> trees;
  std::vector<double> split_probs;  // P-simplex
  double sigma_lambda = 1.0;
  TreePrior tree_prior;
  int leaf_dim = 1;

  static Ensemble root_leaves(int n_trees, int leaf_dim, std::size_t n_features) {
    Ensemble e;
    e.leaf_dim = leaf_dim;
    e.trees.assign(static_cast<std::size_t>(n_trees), DecisionTree::root_leaf(leaf_dim));
    e.split_probs.assign(n_features, 1.0 / static_cast<double>(n_features));
    return e;
  }

  void predict_into(const double* x, double* out) const {
    for (int k = 0; k < leaf_dim; ++k) out[k] = 0.0;
    for (const DecisionTree& tree : trees) {
      const TreeNode& leaf = tree.nodes()[tree.leaf_for(x)];
      for (int k = 0; k < leaf_dim; ++k) out[k] += leaf.leaf[static_cast<std::size_t>(k)];
    }
  }

  std::vector<double> predict(const double* x) const {
    std::vector<double> out(static_cast<std::size_t>(leaf_dim));
    predict_into(x, out.data());
    return out;
  }

  std::vector<int> split_counts(std::size_t n_features) const {
    std::vector<int> counts(n_features, 0);
    for (const DecisionTree& tree : trees) tree.add_split_counts(counts);
    return counts;
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_tree_node(const DecisionTree& tree, int id, std::ostringstream& os) {
  const TreeNode& node = tree.nodes()[static_cast<std::size_t>(id)];
  if (node.is_leaf()) {
    os << " {";
    for (std::size_t k = 0; k < node.leaf.size(); ++k) {
      if (k) os << ',';
      os << format_double(node.leaf[k]);
    }
    os << '}';
  } else {
    os << " [" << node.feature << ',' << format_double(node.cutpoint) << ']';
    write_tree_node(tree, node.left, os);
    write_tree_node(tree, node.right, os);
  }
}

inline int parse_tree_node(std::istringstream& is, DecisionTree& tree, int depth) {
  char c = 0;
  is >> c;
  const int id = static_cast<int>(tree.nodes().size());
  tree.nodes().emplace_back();
  tree.nodes()[id].depth = depth;
  if (c == '[') {
    int feature = 0;
    double cut = 0.0;
    char sep = 0, close = 0;
    is >> feature >> sep >> cut >> close;
    if (!is || sep != ',' || close != ']') throw ParseError("ensemble: malformed internal node");
    tree.nodes()[id].feature = feature;
    tree.nodes()[id].cutpoint = cut;
    const int l = parse_tree_node(is, tree, depth + 1);
    const int r = parse_tree_node(is, tree, depth + 1);
    tree.nodes()[id].left = l;
    tree.nodes()[id].right = r;
  } else if (c == '{') {
    std::vector<double> values;
    for (;;) {
      double v = 0.0;
      is >> v;
      if (!is) throw ParseError("ensemble: malformed leaf");
      values.push_back(v);
      char sep = 0;
      is >> sep;
      if (sep == '}') break;
      if (sep != ',') throw ParseError("ensemble: malformed leaf separator");
    }
    tree.nodes()[id].leaf = std::move(values);
  } else {
    throw ParseError("ensemble: unexpected token in tree record");
  }
  return id;
}

}  // namespace detail

// One header line, one splitting-probability line, then one tree per line
// in preorder with [feature,cut] internal nodes and {lambda_1,...,lambda_K}
// leaves. Doubles are printed with 17 significant digits so the round trip
// is exact.
inline std::string serialize_ensemble(const Ensemble& e) {
  std::ostringstream os;
  os << "qlbart-ensemble trees=" << e.trees.size() << " k=" << e.leaf_dim
     << " p=" << e.split_probs.size() << " sigma_lambda=" << detail::format_double(e.sigma_lambda)
     << " gamma=" << detail::format_double(e.tree_prior.gamma_base)
     << " beta=" << detail::format_double(e.tree_prior.beta_depth)
     << " max_depth=" << e.tree_prior.max_depth << '\n';
  os << "s";
  for (double v : e.split_probs) os << ' ' << detail::format_double(v);
  os << '\n';
  for (const DecisionTree& tree : e.trees) {
    std::ostringstream line;
    detail::write_tree_node(tree, 0, line);
    os << "tree" << line.str() << '\n';
  }
  return os.str();
}

inline Ensemble parse_ensemble(std::istream& in) {
  Ensemble e;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("ensemble: missing header");
  std::size_t n_trees = 0, p = 0;
  {
    std::istringstream hs(line);
    std::string tag;
    hs >> tag;
    if (tag != "qlbart-ensemble") throw ParseError("ensemble: bad magic");
    std::string kv;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("ensemble: bad header field " + kv);
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (key == "trees") n_trees = std::stoul(value);
      else if (key == "k") e.leaf_dim = std::stoi(value);
      else if (key == "p") p = std::stoul(value);
      else if (key == "sigma_lambda") e.sigma_lambda = std::stod(value);
      else if (key == "gamma") e.tree_prior.gamma_base = std::stod(value);
      else if (key == "beta") e.tree_prior.beta_depth = std::stod(value);
      else if (key == "max_depth") e.tree_prior.max_depth = std::stoi(value);
      else throw ParseError("ensemble: unknown header field " + key);
    }
  }
  if (!std::getline(in, line)) throw ParseError("ensemble: missing split-prob line");
  {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "s") throw ParseError("ensemble: expected split-prob line");
    double v = 0.0;
    while (ss >> v) e.split_probs.push_back(v);
    if (e.split_probs.size() != p) throw ParseError("ensemble: split-prob count mismatch");
  }
  for (std::size_t t = 0; t < n_trees; ++t) {
    if (!std::getline(in, line)) throw ParseError("ensemble: missing tree record");
    std::istringstream ts(line);
    std::string tag;
    ts >> tag;
    if (tag != "tree") throw ParseError("ensemble: expected tree record");
    DecisionTree tree = DecisionTree::root_leaf(e.leaf_dim);
    tree.nodes().clear();
    detail::parse_tree_node(ts, tree, 0);
    e.trees.push_back(std::move(tree));
  }
  return e;
}

// Restores grid indices after parsing (cut values are stored verbatim).
inline void rebind_cut_indices(Ensemble& e, const Cutpoints& cuts) {
  for (DecisionTree& tree : e.trees) {
    for (TreeNode& node : tree.nodes()) {
      if (node.is_leaf()) continue;
      const std::vector<double>& grid = cuts.grid[static_cast<std::size_t>(node.feature)];
      node.cut_index = -1;
      for (std::size_t c = 0; c < grid.size(); ++c) {
        if (grid[c] == node.cutpoint) {
          node.cut_index = static_cast<int>(c);
          break;
        }
      }
      if (node.cut_index < 0)
        throw ParseError("ensemble: cutpoint not on the training grid");
    }
  }
}

}  // namespace qlbart
