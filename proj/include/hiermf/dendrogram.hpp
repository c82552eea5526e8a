#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hiermf::hierarchy {

struct ChildRef {
  enum class Kind { leaf, node };
  Kind kind = Kind::leaf;
  std::size_t index = 0;  // into leaves() or nodes()

  static ChildRef leaf(std::size_t i) { return {Kind::leaf, i}; }
  static ChildRef node(std::size_t i) { return {Kind::node, i}; }
  bool is_leaf() const { return kind == Kind::leaf; }
  friend bool operator==(const ChildRef&, const ChildRef&) = default;
};

// Internal merge node a_m. `id` is the user-facing node number m.
struct DendrogramNode {
  int id = 0;
  ChildRef left;
  ChildRef right;
  double height = 0.0;
  std::optional<double> p;  // risk probability, used by the hierarchical model
};

// Rooted binary merge tree over N labeled leaves with exactly N - 1 internal
// nodes. Construction validates the structure; instances are immutable.
class Dendrogram {
 public:
  Dendrogram() = default;
  Dendrogram(std::vector<std::string> leaves, std::vector<DendrogramNode> nodes);

  const std::vector<std::string>& leaves() const { return leaves_; }
  const std::vector<DendrogramNode>& nodes() const { return nodes_; }
  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  // Index of the root node; empty only for a single-leaf tree.
  std::optional<std::size_t> root() const { return root_; }

  std::size_t leaf_index(const std::string& label) const;
  std::optional<std::size_t> find_leaf(const std::string& label) const;
  std::size_t node_index(int id) const;

  std::optional<std::size_t> leaf_parent(std::size_t leaf) const { return leaf_parent_[leaf]; }
  std::optional<std::size_t> node_parent(std::size_t node) const { return node_parent_[node]; }

  // Node indices on the path from the leaf's parent up to the root.
  std::vector<std::size_t> path(std::size_t leaf) const;
  // Hierarchical order of every leaf (path length), aligned with leaves().
  std::vector<int> orders() const;
  // Leaf indices below a node, left subtree first.
  std::vector<std::size_t> leaves_under(std::size_t node) const;

  // Copy with node probabilities replaced (aligned with nodes()).
  Dendrogram with_probabilities(const std::vector<double>& probs) const;
  bool has_probabilities() const;

  friend bool operator==(const Dendrogram& a, const Dendrogram& b);

 private:
  std::vector<std::string> leaves_;
  std::vector<DendrogramNode> nodes_;
  std::optional<std::size_t> root_;
  std::vector<std::optional<std::size_t>> leaf_parent_;
  std::vector<std::optional<std::size_t>> node_parent_;
  std::unordered_map<std::string, std::size_t> leaf_lookup_;
  std::unordered_map<int, std::size_t> node_lookup_;
};

}  // namespace hiermf::hierarchy
