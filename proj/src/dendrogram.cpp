#include "hiermf/dendrogram.hpp"

#include <cmath>

#include "hiermf/common.hpp"

namespace hiermf::hierarchy {
namespace {

std::string where(const DendrogramNode& n) { return "node " + std::to_string(n.id); }

}  // namespace

Dendrogram::Dendrogram(std::vector<std::string> leaves, std::vector<DendrogramNode> nodes)
    : leaves_(std::move(leaves)), nodes_(std::move(nodes)) {
  const std::size_t n = leaves_.size();
  if (n == 0) throw Error("dendrogram: no leaves");
  if (nodes_.size() != n - 1) {
    throw Error("dendrogram: " + std::to_string(n) + " leaves need " + std::to_string(n - 1) +
                " internal nodes, found " + std::to_string(nodes_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (leaves_[i].empty()) throw LocatedError("leaf " + std::to_string(i), "empty leaf label");
    if (!leaf_lookup_.emplace(leaves_[i], i).second) {
      throw LocatedError("leaf '" + leaves_[i] + "'", "duplicate leaf label");
    }
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!node_lookup_.emplace(nodes_[k].id, k).second) {
      throw LocatedError(where(nodes_[k]), "duplicate node id");
    }
  }

  leaf_parent_.assign(n, std::nullopt);
  node_parent_.assign(nodes_.size(), std::nullopt);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& node = nodes_[k];
    if (!std::isfinite(node.height) || node.height < 0.0) {
      throw LocatedError(where(node), "height must be a non-negative real");
    }
    if (node.p && !(*node.p >= 0.0 && *node.p <= 1.0)) {
      throw LocatedError(where(node), "probability outside [0, 1]");
    }
    for (const ChildRef& c : {node.left, node.right}) {
      if (c.is_leaf()) {
        if (c.index >= n) throw LocatedError(where(node), "child leaf out of range");
        if (leaf_parent_[c.index]) {
          throw LocatedError(where(node), "leaf '" + leaves_[c.index] + "' has more than one parent");
        }
        leaf_parent_[c.index] = k;
      } else {
        if (c.index >= nodes_.size()) throw LocatedError(where(node), "child node out of range");
        if (c.index == k) throw LocatedError(where(node), "cycle: node is its own child");
        if (node_parent_[c.index]) {
          throw LocatedError(where(nodes_[c.index]), "node has more than one parent");
        }
        node_parent_[c.index] = k;
      }
    }
  }

  if (nodes_.empty()) return;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!node_parent_[k]) {
      if (root_) throw LocatedError(where(nodes_[k]), "more than one root");
      root_ = k;
    }
  }
  if (!root_) throw Error("dendrogram: cycle detected (no root)");

  // With N-1 nodes, one parent each and a unique root, reachability of every
  // node from the root rules out cycles.
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack{*root_};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    if (seen[k]) throw LocatedError(where(nodes_[k]), "cycle detected");
    seen[k] = 1;
    ++visited;
    for (const ChildRef& c : {nodes_[k].left, nodes_[k].right}) {
      if (!c.is_leaf()) {
        if (nodes_[c.index].height > nodes_[k].height) {
          throw LocatedError(where(nodes_[c.index]), "height exceeds parent height");
        }
        stack.push_back(c.index);
      }
    }
  }
  if (visited != nodes_.size()) {
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      if (!seen[k]) throw LocatedError(where(nodes_[k]), "cycle detected (unreachable from root)");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!leaf_parent_[i]) throw LocatedError("leaf '" + leaves_[i] + "'", "leaf not attached to the tree");
  }
}

std::optional<std::size_t> Dendrogram::find_leaf(const std::string& label) const {
  const auto it = leaf_lookup_.find(label);
  if (it == leaf_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dendrogram::leaf_index(const std::string& label) const {
  const auto i = find_leaf(label);
  if (!i) throw Error("unknown leaf '" + label + "'");
  return *i;
}

std::size_t Dendrogram::node_index(int id) const {
  const auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) throw Error("unknown node id " + std::to_string(id));
  return it->second;
}

std::vector<std::size_t> Dendrogram::path(std::size_t leaf) const {
  if (leaf >= leaves_.size()) throw Error("leaf index out of range");
  std::vector<std::size_t> out;
  for (auto k = leaf_parent_[leaf]; k; k = node_parent_[*k]) out.push_back(*k);
  return out;
}

std::vector<int> Dendrogram::orders() const {
  // depth of each node counted in nodes from the root (root = 1)
  std::vector<int> depth(nodes_.size(), 0);
  std::vector<int> out(leaves_.size(), 0);
  if (!root_) return out;
  std::vector<std::size_t> stack{*root_};
  depth[*root_] = 1;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    for (const ChildRef& c : {nodes_[k].left, nodes_[k].right}) {
      if (c.is_leaf()) {
        out[c.index] = depth[k];
      } else {
        depth[c.index] = depth[k] + 1;
        stack.push_back(c.index);
      }
    }
  }
  return out;
}

std::vector<std::size_t> Dendrogram::leaves_under(std::size_t node) const {
  std::vector<std::size_t> out;
  std::vector<ChildRef> stack{ChildRef::node(node)};
  while (!stack.empty()) {
    const ChildRef c = stack.back();
    stack.pop_back();
    if (c.is_leaf()) {
      out.push_back(c.index);
    } else {
      stack.push_back(nodes_[c.index].right);
      stack.push_back(nodes_[c.index].left);
    }
  }
  return out;
}

Dendrogram Dendrogram::with_probabilities(const std::vector<double>& probs) const {
  if (probs.size() != nodes_.size()) throw Error("with_probabilities: one probability per node required");
  auto nodes = nodes_;
  for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k].p = probs[k];
  return Dendrogram(leaves_, std::move(nodes));
}

bool Dendrogram::has_probabilities() const {
  for (const auto& n : nodes_) {
    if (!n.p) return false;
  }
  return true;
}

bool operator==(const Dendrogram& a, const Dendrogram& b) {
  if (a.leaves_ != b.leaves_ || a.nodes_.size() != b.nodes_.size()) return false;
  for (std::size_t k = 0; k < a.nodes_.size(); ++k) {
    const auto& x = a.nodes_[k];
    const auto& y = b.nodes_[k];
    if (x.id != y.id || !(x.left == y.left) || !(x.right == y.right) || x.height != y.height || x.p != y.p) {
      return false;
    }
  }
  return a.root_ == b.root_;
}

}  // namespace hiermf::hierarchy
