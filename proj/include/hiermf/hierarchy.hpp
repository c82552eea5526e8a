#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hiermf/common.hpp"
#include "hiermf/dendrogram.hpp"
#include "hiermf/dependence.hpp"
#include "hiermf/io.hpp"
#include "hiermf/market_data.hpp"

namespace hiermf::hierarchy {

enum class Linkage { single, average, complete };

Linkage parse_linkage(const std::string& name);
std::string to_string(Linkage method);

// Agglomerative clustering on a symmetric zero-diagonal distance matrix.
// Ties are broken by the lexicographically smallest pair of cluster ids
// (leaves are 0..N-1, the k-th merge creates cluster N+k). Node ids are
// assigned top-down: the root is 1 and the first merge is N-1.
Dendrogram linkage_cluster(const Matrix& distances, const std::vector<std::string>& labels,
                           Linkage method = Linkage::average);

struct LeafPath {
  std::string leaf;
  std::vector<int> node_ids;           // deepest ancestor first, root last
  std::vector<DendrogramNode> nodes;   // matching node records
};

LeafPath leaf_path(const Dendrogram& tree, const std::string& leaf);
int hierarchical_order(const Dendrogram& tree, const std::string& leaf);
std::map<std::string, int> order_profile(const Dendrogram& tree);

struct FixedCount {
  std::size_t k = 1;
};
struct LargestGap {};
using CutCriterion = std::variant<FixedCount, LargestGap>;

struct ClusterCut {
  std::string criterion;
  std::vector<std::vector<std::string>> clusters;
  std::vector<int> assignment;  // cluster index per leaf, aligned with tree.leaves()
  std::size_t count = 0;
};

// Fixed count removes the k-1 highest merges; largest gap cuts between the two
// consecutive sorted merge heights with maximal difference (the higher of
// equal gaps, i.e. fewer clusters).
ClusterCut cluster_cut(const Dendrogram& tree, const CutCriterion& criterion);

// Every clade (leaf-label set under an internal node), for structural comparison.
std::set<std::set<std::string>> clades(const Dendrogram& tree);

// Random binary tree built by merging uniformly chosen clusters; heights are
// the merge step, node ids top-down as in linkage_cluster.
Dendrogram random_dendrogram(const std::vector<std::string>& labels, std::uint64_t seed);

// Comb (caterpillar) tree: leaves 0 and 1 merge first, then each further
// leaf joins the growing cluster, so orders are N-1, N-1, N-2, ..., 1.
Dendrogram comb_dendrogram(const std::vector<std::string>& labels);

struct StabilityRule {
  double min_modal_fraction = 0.67;
  int max_deviation = 1;
};

struct BootstrapReport {
  std::size_t resamples = 0;
  std::size_t redrawn = 0;  // degenerate resamples replaced
  std::vector<std::string> leaves;
  std::vector<int> point_orders;
  std::vector<std::map<int, std::size_t>> histograms;  // per leaf: order -> count
  std::vector<int> modal_orders;
  std::vector<double> modal_fractions;
  std::vector<std::string> retained;
  std::string rule;
};

struct BootstrapOptions {
  std::size_t resamples = 100;
  std::uint64_t seed = 0;
  Linkage method = Linkage::average;
  StabilityRule rule{};
  unsigned jobs = 1;
};

BootstrapReport bootstrap_orders(const market::ReturnsPanel& panel, const dependence::WeightScheme& scheme,
                                 const BootstrapOptions& options);

// Dendrogram interchange: {"leaves": [...], "nodes": [{"id", "left", "right",
// "height", "p"?}], "root": id}, where children are node ids or "leaf:<label>".
io::Json dendrogram_to_json(const Dendrogram& tree);
Dendrogram dendrogram_from_json(const io::Json& doc, const std::string& origin = "<json>");
void serialize_dendrogram(const Dendrogram& tree, const std::filesystem::path& path);
Dendrogram parse_dendrogram(const std::filesystem::path& path);

}  // namespace hiermf::hierarchy
