#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hiermf/dependence.hpp"
#include "hiermf/stats.hpp"
#include "test_util.hpp"

using namespace hiermf;
using namespace hiermf::dependence;

namespace {

// The 5-row panel used for the hand-computed Pearson oracle.
Matrix hand_panel() {
  Matrix x(5, 3);
  x << 1, 2, 0.5, 2, 1, 1.5, 4, 3, -1, 3, 5, 2, 6, 4, 0;
  return x;
}

market::ReturnsPanel panel_of(const Matrix& m) {
  market::ReturnsPanel p;
  for (Eigen::Index c = 0; c < m.cols(); ++c) p.assets.push_back("A" + std::to_string(c));
  p.values = m;
  return p;
}

}  // namespace

TEST_SUITE("dependence") {

TEST_CASE("exponential weights") {
  const auto w = exp_weights(3, 1.0);
  REQUIRE(w.weights.size() == 3);
  CHECK(w.weights[0] == doctest::Approx(0.0900).epsilon(1e-3));
  CHECK(w.weights[1] == doctest::Approx(0.2447).epsilon(1e-3));
  CHECK(w.weights[2] == doctest::Approx(0.6652).epsilon(1e-3));
  // Frozen reference values of the normalized e^-2, e^-1, e^0.
  CHECK(std::abs(w.weights[0] - 0.09003057) < 1e-8);
  CHECK(std::abs(w.weights[2] - 0.66524096) < 1e-8);

  for (double v : exp_weights(4, 1e9).weights) CHECK(std::abs(v - 0.25) < 1e-6);
  CHECK(default_theta(4026) == 1342.0);
  CHECK(default_theta(752) == 250.0);
  double sum = 0.0;
  for (double v : exp_weights(4026, 1342).weights) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)exp_weights(0, 1.0), Error);
  CHECK_THROWS_AS((void)exp_weights(5, 0.0), Error);
}

TEST_CASE("perfectly dependent columns") {
  Matrix m(6, 3);
  m.col(0) << 1, 3, 2, 5, 4, 7;
  m.col(1) = m.col(0);
  m.col(2) = -m.col(0);
  const auto c = weighted_pearson_matrix(panel_of(m), exp_weights(6, 2.0));
  CHECK(c.values(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.values(0, 2) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(c.scheme == "exponential");
}

TEST_CASE("hand-computed Pearson panel") {
  const auto c = weighted_pearson_matrix(panel_of(hand_panel()), flat_weights(5));
  CHECK(c.values(0, 1) == doctest::Approx(0.5753964555687504).epsilon(1e-12));
  CHECK(c.values(0, 2) == doctest::Approx(-0.44639114521707585).epsilon(1e-12));
  CHECK(c.values(1, 2) == doctest::Approx(0.06622661785325215).epsilon(1e-12));
  // Same panel with exponential weights, theta = 2.
  const auto e = weighted_pearson_matrix(panel_of(hand_panel()), exp_weights(5, 2.0));
  CHECK(e.values(0, 1) == doctest::Approx(0.3652778153043142).epsilon(1e-12));
  CHECK(e.values(0, 2) == doctest::Approx(-0.5668704472993882).epsilon(1e-12));
}

TEST_CASE("flat weights reproduce unweighted Pearson") {
  const auto a = test_util::gaussian(300, 1);
  auto b = test_util::gaussian(300, 2);
  for (std::size_t t = 0; t < b.size(); ++t) b[t] += 0.5 * a[t];
  Matrix m(300, 2);
  for (int t = 0; t < 300; ++t) m.row(t) << a[static_cast<std::size_t>(t)], b[static_cast<std::size_t>(t)];
  const auto c = weighted_pearson(m, flat_weights(300).weights);
  CHECK(std::abs(c(0, 1) - stats::pearson(a, b)) < 1e-12);
}

TEST_CASE("correlation is invariant to positive column scaling") {
  Matrix m(200, 4);
  for (int c = 0; c < 4; ++c) {
    const auto g = test_util::gaussian(200, 10 + static_cast<std::uint64_t>(c));
    for (int t = 0; t < 200; ++t) m(t, c) = g[static_cast<std::size_t>(t)] + (c > 0 ? 0.3 * m(t, 0) : 0.0);
  }
  const auto w = exp_weights(200, 50);
  const Matrix base = weighted_pearson(m, w.weights);
  Matrix scaled = m;
  scaled.col(1) *= 1e3;
  scaled.col(3) *= 0.0007;
  CHECK((weighted_pearson(scaled, w.weights) - base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero-variance column is named in the error") {
  Matrix m(4, 2);
  m << 1, 5, 2, 5, 3, 5, 4, 5;
  try {
    (void)weighted_pearson(m, flat_weights(4).weights, {"X", "FLAT"});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("FLAT") != std::string::npos);
  }
}

TEST_CASE("Kendall tau examples") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(kendall_tau(x, std::vector<double>{2, 4, 6, 8, 10}) == 1.0);
  CHECK(kendall_tau(x, std::vector<double>{-1, -2, -3, -4, -5}) == -1.0);
  CHECK(kendall_tau(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}) == doctest::Approx(1.0 / 3.0));
  // Tie-corrected reference value.
  CHECK(kendall_tau(std::vector<double>{1, 2, 2, 3, 4, 4, 5}, std::vector<double>{2, 1, 3, 3, 5, 4, 4}) ==
        doctest::Approx(0.6842105263157894).epsilon(1e-12));
  CHECK_THROWS_AS((void)kendall_tau(x, std::vector<double>(5, 1.0)), Error);
  CHECK_THROWS_AS((void)kendall_tau(x, std::vector<double>{1, 2}), Error);
}

TEST_CASE("Kendall tau matches the elliptical curve on Gaussian pairs") {
  for (double rho : {0.2, 0.5, 0.8}) {
    const auto a = test_util::gaussian(100000, 41);
    auto b = test_util::gaussian(100000, 42);
    for (std::size_t t = 0; t < b.size(); ++t) b[t] = rho * a[t] + std::sqrt(1 - rho * rho) * b[t];
    CHECK(std::abs(kendall_tau(a, b) - elliptical_tau(rho)) < 0.01);
  }
}

TEST_CASE("elliptical tau and distance") {
  CHECK(elliptical_tau(0.0) == 0.0);
  CHECK(elliptical_tau(1.0) == doctest::Approx(1.0));
  CHECK(elliptical_tau(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  Matrix rho(3, 3);
  rho << 1, 0.5, -1, 0.5, 1, 1, -1, 1, 1;
  const Matrix d = corr_to_distance(rho);
  CHECK(d(0, 1) == doctest::Approx(1.0));
  CHECK(d(0, 2) == doctest::Approx(2.0));
  CHECK(d(1, 2) == 0.0);
  CHECK(d(0, 0) == 0.0);
}

TEST_CASE("correlation validation") {
  Matrix ok = Matrix::Identity(3, 3);
  CHECK_NOTHROW(validate_correlation(ok));
  Matrix asym = ok;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(validate_correlation(asym), Error);
  Matrix not_psd(3, 3);
  not_psd << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  CHECK_THROWS_AS(validate_correlation(not_psd), Error);
}

TEST_CASE("correlation csv round trip keeps the scheme") {
  const auto dir = test_util::scratch("dep_csv");
  auto c = weighted_pearson_matrix(panel_of(hand_panel()), exp_weights(5, 2.0));
  write_correlation_csv(dir / "c.csv", c);
  const auto back = load_correlation_csv(dir / "c.csv");
  CHECK(back.assets == c.assets);
  CHECK(back.values == c.values);
  CHECK(back.scheme == "exponential");
  CHECK(back.theta == 2.0);
  CHECK(back.window == 5);
}

}
