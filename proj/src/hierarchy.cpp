#include "hiermf/hierarchy.hpp"

#include <algorithm>
#include <random>

#include "hiermf/stats.hpp"

namespace hiermf::hierarchy {
namespace {

// Partition induced by deleting the flagged merges (an ancestor-closed set).
ClusterCut cut_removing(const Dendrogram& tree, const std::vector<char>& removed, std::string criterion) {
  ClusterCut cut;
  cut.criterion = std::move(criterion);
  cut.assignment.assign(tree.leaf_count(), -1);
  auto add_cluster = [&](const std::vector<std::size_t>& leaves) {
    std::vector<std::string> labels;
    for (std::size_t i : leaves) {
      cut.assignment[i] = static_cast<int>(cut.clusters.size());
      labels.push_back(tree.leaves()[i]);
    }
    cut.clusters.push_back(std::move(labels));
  };
  if (!tree.root()) {
    add_cluster({0});
  } else {
    std::vector<ChildRef> stack{ChildRef::node(*tree.root())};
    while (!stack.empty()) {
      const ChildRef c = stack.back();
      stack.pop_back();
      if (c.is_leaf()) {
        add_cluster({c.index});
      } else if (!removed[c.index]) {
        add_cluster(tree.leaves_under(c.index));
      } else {
        stack.push_back(tree.nodes()[c.index].right);
        stack.push_back(tree.nodes()[c.index].left);
      }
    }
  }
  cut.count = cut.clusters.size();
  return cut;
}

}  // namespace

LeafPath leaf_path(const Dendrogram& tree, const std::string& leaf) {
  LeafPath out;
  out.leaf = leaf;
  for (std::size_t k : tree.path(tree.leaf_index(leaf))) {
    out.node_ids.push_back(tree.nodes()[k].id);
    out.nodes.push_back(tree.nodes()[k]);
  }
  return out;
}

int hierarchical_order(const Dendrogram& tree, const std::string& leaf) {
  return static_cast<int>(tree.path(tree.leaf_index(leaf)).size());
}

std::map<std::string, int> order_profile(const Dendrogram& tree) {
  std::map<std::string, int> out;
  const auto orders = tree.orders();
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) out[tree.leaves()[i]] = orders[i];
  return out;
}

ClusterCut cluster_cut(const Dendrogram& tree, const CutCriterion& criterion) {
  const std::size_t n = tree.leaf_count();
  std::vector<char> removed(tree.node_count(), 0);

  if (const auto* fixed = std::get_if<FixedCount>(&criterion)) {
    if (fixed->k < 1 || fixed->k > n) {
      throw Error("cluster_cut: k = " + std::to_string(fixed->k) + " outside [1, " + std::to_string(n) + "]");
    }
    // Greedily delete the highest merge whose parent is already deleted.
    std::vector<std::size_t> frontier;
    if (tree.root()) frontier.push_back(*tree.root());
    for (std::size_t step = 0; step + 1 < fixed->k; ++step) {
      auto best = frontier.begin();
      for (auto it = frontier.begin(); it != frontier.end(); ++it) {
        const auto& a = tree.nodes()[*it];
        const auto& b = tree.nodes()[*best];
        if (a.height > b.height || (a.height == b.height && a.id < b.id)) best = it;
      }
      const std::size_t k = *best;
      frontier.erase(best);
      removed[k] = 1;
      for (const ChildRef& c : {tree.nodes()[k].left, tree.nodes()[k].right}) {
        if (!c.is_leaf()) frontier.push_back(c.index);
      }
    }
    return cut_removing(tree, removed, "fixed count k=" + std::to_string(fixed->k));
  }

  std::vector<double> heights;
  for (const auto& node : tree.nodes()) heights.push_back(node.height);
  std::sort(heights.begin(), heights.end());
  if (heights.size() >= 2) {
    std::size_t best = 0;
    for (std::size_t i = 1; i + 1 < heights.size(); ++i) {
      if (heights[i + 1] - heights[i] >= heights[best + 1] - heights[best]) best = i;
    }
    const double threshold = heights[best];
    for (std::size_t k = 0; k < tree.node_count(); ++k) removed[k] = tree.nodes()[k].height > threshold;
  }
  return cut_removing(tree, removed, "largest height gap (dendrogram-native analogue of DBHT clusters)");
}

std::set<std::set<std::string>> clades(const Dendrogram& tree) {
  std::set<std::set<std::string>> out;
  for (std::size_t k = 0; k < tree.node_count(); ++k) {
    std::set<std::string> clade;
    for (std::size_t i : tree.leaves_under(k)) clade.insert(tree.leaves()[i]);
    out.insert(std::move(clade));
  }
  return out;
}

BootstrapReport bootstrap_orders(const market::ReturnsPanel& panel, const dependence::WeightScheme& scheme,
                                 const BootstrapOptions& options) {
  if (options.resamples < 50) {
    throw Error("bootstrap_orders: at least 50 resamples required (got " + std::to_string(options.resamples) + ")");
  }
  const std::size_t rows = panel.rows();
  const std::size_t n = panel.cols();
  if (scheme.weights.size() != rows) throw Error("bootstrap_orders: weight scheme does not match panel length");

  auto orders_of = [&](const Matrix& values) {
    const Matrix rho = dependence::weighted_pearson(values, scheme.weights, panel.assets);
    return linkage_cluster(dependence::corr_to_distance(rho), panel.assets, options.method).orders();
  };

  BootstrapReport report;
  report.resamples = options.resamples;
  report.leaves = panel.assets;
  report.point_orders = orders_of(panel.values);

  std::vector<std::vector<int>> draws(options.resamples);
  std::vector<std::size_t> redraws(options.resamples, 0);
  parallel_for(options.resamples, options.jobs, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(options.seed, r));
    std::uniform_int_distribution<std::size_t> pick(0, rows - 1);
    Matrix sample(panel.values.rows(), panel.values.cols());
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) throw Error("bootstrap_orders: could not draw a non-degenerate resample");
      for (std::size_t t = 0; t < rows; ++t) {
        sample.row(static_cast<Eigen::Index>(t)) = panel.values.row(static_cast<Eigen::Index>(pick(rng)));
      }
      try {
        draws[r] = orders_of(sample);
        return;
      } catch (const Error&) {
        ++redraws[r];
      }
    }
  });

  report.histograms.assign(n, {});
  for (const auto& d : draws) {
    for (std::size_t i = 0; i < n; ++i) ++report.histograms[i][d[i]];
  }
  for (std::size_t r : redraws) report.redrawn += r;
  for (std::size_t i = 0; i < n; ++i) {
    int modal = 0;
    std::size_t best = 0;
    for (const auto& [order, count] : report.histograms[i]) {
      if (count > best) {
        best = count;
        modal = order;
      }
    }
    const double fraction = static_cast<double>(best) / static_cast<double>(options.resamples);
    report.modal_orders.push_back(modal);
    report.modal_fractions.push_back(fraction);
    if (fraction >= options.rule.min_modal_fraction &&
        std::abs(modal - report.point_orders[i]) <= options.rule.max_deviation) {
      report.retained.push_back(panel.assets[i]);
    }
  }
  report.rule = "modal order frequency >= " + format_double(options.rule.min_modal_fraction) +
                " and |modal - point estimate| <= " + std::to_string(options.rule.max_deviation);
  return report;
}

}  // namespace hiermf::hierarchy
