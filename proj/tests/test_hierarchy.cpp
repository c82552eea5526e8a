#include <doctest.h>

#include <algorithm>
#include <set>

#include "hiermf/hierarchy.hpp"
#include "test_util.hpp"

using namespace hiermf;
using namespace hiermf::hierarchy;

namespace {

Matrix three_points() {
  Matrix d(3, 3);
  d << 0, 1, 4, 1, 0, 5, 4, 5, 0;
  return d;
}

// Distances |x_i - x_j| for points on a line.
Matrix line_distances(const std::vector<double>& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
  }
  return d;
}

std::vector<std::string> labels(std::size_t n, const std::string& prefix = "L") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_SUITE("hierarchy") {

TEST_CASE("three-point single and complete linkage") {
  const std::vector<std::string> abc{"A", "B", "C"};
  const auto single = linkage_cluster(three_points(), abc, Linkage::single);
  REQUIRE(single.node_count() == 2);
  const auto& first = single.nodes()[single.node_index(2)];
  CHECK(first.height == 1.0);
  CHECK(single.leaves_under(single.node_index(2)).size() == 2);
  CHECK(single.nodes()[*single.root()].id == 1);
  CHECK(single.nodes()[*single.root()].height == 4.0);
  CHECK(hierarchical_order(single, "C") == 1);
  CHECK(hierarchical_order(single, "A") == 2);

  const auto complete = linkage_cluster(three_points(), abc, Linkage::complete);
  CHECK(complete.nodes()[*complete.root()].height == 5.0);
  CHECK(complete.nodes()[complete.node_index(2)].height == 1.0);

  const auto average = linkage_cluster(three_points(), abc, Linkage::average);
  CHECK(average.nodes()[*average.root()].height == 4.5);
}

TEST_CASE("two leaves give a single root") {
  Matrix d(2, 2);
  d << 0, 0.7, 0.7, 0;
  const auto t = linkage_cluster(d, {"A", "B"});
  REQUIRE(t.node_count() == 1);
  CHECK(t.nodes()[0].height == 0.7);
  CHECK(leaf_path(t, "A").node_ids == std::vector<int>{1});
  CHECK(leaf_path(t, "B").node_ids == std::vector<int>{1});
  CHECK(hierarchical_order(t, "B") == 1);
}

TEST_CASE("linkage input validation") {
  Matrix asym = three_points();
  asym(0, 1) = 2;
  CHECK_THROWS_AS((void)linkage_cluster(asym, {"A", "B", "C"}), Error);
  Matrix neg = three_points();
  neg(0, 1) = neg(1, 0) = -1;
  CHECK_THROWS_AS((void)linkage_cluster(neg, {"A", "B", "C"}), Error);
  CHECK_THROWS_AS((void)linkage_cluster(three_points(), {"A", "B"}), Error);
  CHECK_THROWS_AS((void)parse_linkage("ward"), Error);
  CHECK(parse_linkage("complete") == Linkage::complete);
}

TEST_CASE("ties go to the smallest pair of cluster ids") {
  // Four equidistant points: the first merge must be leaves 0 and 1.
  Matrix d = Matrix::Constant(4, 4, 1.0);
  d.diagonal().setZero();
  const auto t = linkage_cluster(d, {"W", "X", "Y", "Z"}, Linkage::single);
  const auto under = t.leaves_under(t.node_index(3));
  CHECK(std::set<std::size_t>(under.begin(), under.end()) == std::set<std::size_t>{0, 1});
}

TEST_CASE("figure 1 fixture") {
  const auto tree = parse_dendrogram(test_util::fixture("fig1_tree.json"));
  const auto path = leaf_path(tree, "i");
  CHECK(path.node_ids == std::vector<int>{10, 8, 5, 4, 2, 1});
  std::set<int> gamma(path.node_ids.begin(), path.node_ids.end());
  CHECK(gamma == std::set<int>{1, 2, 4, 5, 8, 10});
  CHECK(hierarchical_order(tree, "i") == 6);
  CHECK(order_profile(tree).at("i") == 6);
  CHECK(tree.node_count() == tree.leaf_count() - 1);
  CHECK_THROWS_AS((void)leaf_path(tree, "nope"), Error);
}

TEST_CASE("balanced trees have equal orders") {
  const auto four = linkage_cluster(line_distances({0, 1, 10, 11}), labels(4));
  for (const auto& l : four.leaves()) CHECK(leaf_path(four, l).node_ids.size() == 2);
  const auto eight = linkage_cluster(line_distances({0, 1, 10, 11, 100, 101, 110, 111}), labels(8));
  for (const auto& [leaf, n] : order_profile(eight)) CHECK(n == 3);
}

TEST_CASE("comb trees") {
  const auto comb4 = comb_dendrogram({"a", "b", "c", "d"});
  CHECK(comb4.orders() == std::vector<int>{3, 3, 2, 1});
  const auto comb11 = comb_dendrogram(labels(11));
  const auto orders11 = comb11.orders();
  CHECK(*std::max_element(orders11.begin(), orders11.end()) == 10);
  CHECK(hierarchical_order(comb11, "L0") == 10);
}

TEST_CASE("cluster cuts") {
  const auto tree = linkage_cluster(line_distances({0, 1, 10, 11, 30, 31.5}), labels(6), Linkage::single);
  const auto one = cluster_cut(tree, FixedCount{1});
  CHECK(one.count == 1);
  CHECK(one.clusters[0].size() == 6);
  const auto all = cluster_cut(tree, FixedCount{6});
  CHECK(all.count == 6);
  for (const auto& c : all.clusters) CHECK(c.size() == 1);
  CHECK_THROWS_AS((void)cluster_cut(tree, FixedCount{0}), Error);
  CHECK_THROWS_AS((void)cluster_cut(tree, FixedCount{7}), Error);

  const auto three = cluster_cut(tree, FixedCount{3});
  CHECK(three.count == 3);
  std::set<std::set<std::string>> got;
  for (const auto& c : three.clusters) got.insert(as_set(c));
  CHECK(got == std::set<std::set<std::string>>{{"L0", "L1"}, {"L2", "L3"}, {"L4", "L5"}});
  CHECK(three.assignment[0] == three.assignment[1]);
  CHECK(three.assignment[0] != three.assignment[2]);
}

TEST_CASE("largest gap cut on the three-point example") {
  const auto tree = linkage_cluster(three_points(), {"A", "B", "C"}, Linkage::single);
  const auto cut = cluster_cut(tree, LargestGap{});
  CHECK(cut.count == 2);
  std::set<std::set<std::string>> got;
  for (const auto& c : cut.clusters) got.insert(as_set(c));
  CHECK(got == std::set<std::set<std::string>>{{"A", "B"}, {"C"}});
}

TEST_CASE("dendrogram JSON round trip") {
  const auto tree = random_dendrogram(labels(64), 99);
  const auto dir = test_util::scratch("hier_json");
  serialize_dendrogram(tree, dir / "t.json");
  CHECK(parse_dendrogram(dir / "t.json") == tree);
  const auto fig1 = parse_dendrogram(test_util::fixture("fig1_tree.json"));
  CHECK(dendrogram_from_json(dendrogram_to_json(fig1)) == fig1);
}

TEST_CASE("malformed dendrogram files") {
  auto expect_error = [](const std::string& json, const std::string& fragment) {
    try {
      (void)dendrogram_from_json(io::Json::parse(json), "t.json");
      FAIL("expected an error for " << json);
    } catch (const Error& e) {
      CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
  };
  expect_error(R"({"leaves":["A","B","C"],"nodes":[{"id":1,"children":["leaf:A","leaf:B","leaf:C"],"height":1}]})",
               "non-binary node");
  expect_error(R"({"leaves":["A","B"],"nodes":[{"id":1,"left":"leaf:A","right":"leaf:Z","height":1}]})", "leaf:Z");
  expect_error(R"({"leaves":["A","A"],"nodes":[{"id":1,"left":"leaf:A","right":"leaf:A","height":1}]})", "duplicate");
  expect_error(R"({"leaves":["A","B","C"],"nodes":[{"id":1,"left":1,"right":"leaf:C","height":1},
                 {"id":2,"left":"leaf:A","right":"leaf:B","height":0.5}]})",
               "t.json");
  expect_error(R"({"leaves":["A","B"],"nodes":[{"id":1,"left":"leaf:A","right":"leaf:B","height":1,"p":1.5}]})", "p");
}

TEST_CASE("bootstrap on two separated blocks keeps every order") {
  market::ReturnsPanel panel;
  panel.assets = {"A1", "A2", "B1", "B2"};
  const auto fa = test_util::gaussian(400, 1), fb = test_util::gaussian(400, 2);
  panel.values = Matrix(400, 4);
  for (int c = 0; c < 4; ++c) {
    const auto noise = test_util::gaussian(400, 10 + static_cast<std::uint64_t>(c));
    for (int t = 0; t < 400; ++t) {
      const auto s = static_cast<std::size_t>(t);
      panel.values(t, c) = (c < 2 ? fa[s] : fb[s]) + 0.1 * noise[s];
    }
  }
  BootstrapOptions opt;
  opt.seed = 5;
  const auto report = bootstrap_orders(panel, dependence::flat_weights(400), opt);
  CHECK(report.resamples == 100);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(report.point_orders[i] == 2);
    CHECK(report.modal_fractions[i] == 1.0);
  }
  CHECK(report.retained.size() == 4);

  SUBCASE("fixed seed gives an identical report") {
    const auto again = bootstrap_orders(panel, dependence::flat_weights(400), opt);
    CHECK(again.histograms == report.histograms);
    CHECK(again.retained == report.retained);
  }
  SUBCASE("too few resamples is an error") {
    opt.resamples = 0;
    CHECK_THROWS_AS((void)bootstrap_orders(panel, dependence::flat_weights(400), opt), Error);
  }
}

TEST_CASE("bootstrap on near-identical columns is unstable") {
  market::ReturnsPanel panel;
  panel.assets = labels(8, "S");
  const auto f = test_util::gaussian(300, 3);
  panel.values = Matrix(300, 8);
  for (int c = 0; c < 8; ++c) {
    const auto noise = test_util::gaussian(300, 30 + static_cast<std::uint64_t>(c));
    for (int t = 0; t < 300; ++t) panel.values(t, c) = f[static_cast<std::size_t>(t)] + 1e-3 * noise[static_cast<std::size_t>(t)];
  }
  BootstrapOptions opt;
  opt.seed = 8;
  const auto report = bootstrap_orders(panel, dependence::flat_weights(300), opt);
  double mean_modal = 0.0;
  for (double m : report.modal_fractions) mean_modal += m / 8.0;
  MESSAGE("mean modal fraction " << mean_modal << ", retained " << report.retained.size() << "/8");
  CHECK(mean_modal < 0.9);
}

}
