#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hiermf/hierarchy.hpp"

namespace hiermf::hierarchy {
namespace {

struct Merge {
  std::size_t a = 0;  // cluster ids: < N leaf, >= N merge (id - N)
  std::size_t b = 0;
  double height = 0.0;
};

Dendrogram from_merges(const std::vector<std::string>& labels, const std::vector<Merge>& merges) {
  const std::size_t n = labels.size();
  std::vector<DendrogramNode> nodes(merges.size());
  auto ref = [n](std::size_t cid) { return cid < n ? ChildRef::leaf(cid) : ChildRef::node(cid - n); };
  for (std::size_t m = 0; m < merges.size(); ++m) {
    nodes[m].id = static_cast<int>(merges.size() - m);
    nodes[m].left = ref(merges[m].a);
    nodes[m].right = ref(merges[m].b);
    nodes[m].height = merges[m].height;
  }
  return Dendrogram(labels, std::move(nodes));
}

}  // namespace

Linkage parse_linkage(const std::string& name) {
  if (name == "single") return Linkage::single;
  if (name == "average") return Linkage::average;
  if (name == "complete") return Linkage::complete;
  throw Error("unknown linkage '" + name + "' (expected single, average or complete)");
}

std::string to_string(Linkage method) {
  switch (method) {
    case Linkage::single: return "single";
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
  }
  return "unknown";
}

Dendrogram linkage_cluster(const Matrix& distances, const std::vector<std::string>& labels, Linkage method) {
  const auto n = static_cast<std::size_t>(distances.rows());
  if (distances.rows() != distances.cols()) throw Error("linkage: distance matrix is not square");
  if (labels.size() != n) throw Error("linkage: label count does not match matrix size");
  if (n == 0) throw Error("linkage: empty distance matrix");
  if (!distances.allFinite()) throw Error("linkage: non-finite distance entries");
  for (std::size_t i = 0; i < n; ++i) {
    if (distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) != 0.0) {
      throw Error("linkage: distance matrix diagonal must be zero");
    }
  }
  if ((distances - distances.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error("linkage: distance matrix is not symmetric");
  }

  // Working matrix indexed by cluster id; clusters created later get new rows.
  const std::size_t total = 2 * n - 1;
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  d.topLeftCorner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = distances;
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<double> size(total, 1.0);
  std::vector<Merge> merges;
  merges.reserve(n - 1);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    // active is sorted by id, so the first strict minimum is the smallest pair
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const double v = d(static_cast<Eigen::Index>(active[x]), static_cast<Eigen::Index>(active[y]));
        if (v < best) {
          best = v;
          ba = x;
          bb = y;
        }
      }
    }
    const std::size_t a = active[ba], b = active[bb];
    const std::size_t c = n + step;
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    const auto ic = static_cast<Eigen::Index>(c);
    for (std::size_t k : active) {
      if (k == a || k == b) continue;
      const auto ik = static_cast<Eigen::Index>(k);
      double v = 0.0;
      switch (method) {
        case Linkage::single: v = std::min(d(ia, ik), d(ib, ik)); break;
        case Linkage::complete: v = std::max(d(ia, ik), d(ib, ik)); break;
        case Linkage::average:
          v = (size[a] * d(ia, ik) + size[b] * d(ib, ik)) / (size[a] + size[b]);
          break;
      }
      d(ic, ik) = v;
      d(ik, ic) = v;
    }
    size[c] = size[a] + size[b];
    merges.push_back({a, b, best});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(ba));
    active.push_back(c);
  }
  return from_merges(labels, merges);
}

Dendrogram random_dendrogram(const std::vector<std::string>& labels, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (n == 0) throw Error("random_dendrogram: no labels");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<Merge> merges;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    std::size_t x = pick(rng);
    std::size_t y = pick(rng);
    while (y == x) y = pick(rng);
    if (x > y) std::swap(x, y);
    merges.push_back({active[x], active[y], static_cast<double>(step + 1)});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(y));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(x));
    active.push_back(n + step);
  }
  return from_merges(labels, merges);
}

Dendrogram comb_dendrogram(const std::vector<std::string>& labels) {
  const std::size_t n = labels.size();
  if (n == 0) throw Error("comb_dendrogram: no labels");
  std::vector<Merge> merges;
  std::size_t current = 0;
  for (std::size_t i = 1; i < n; ++i) {
    merges.push_back({current, i, static_cast<double>(i)});
    current = n + (i - 1);
  }
  return from_merges(labels, merges);
}

}  // namespace hiermf::hierarchy
