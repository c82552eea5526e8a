#include <doctest.h>

#include <cmath>

#include "hiermf/dhm.hpp"
#include "hiermf/market_data.hpp"
#include "hiermf/scaling.hpp"
#include "hiermf/stats.hpp"
#include "test_util.hpp"

using namespace hiermf;
using namespace hiermf::scaling;

namespace {

std::vector<double> linear_path(std::size_t n, double c) {
  std::vector<double> p(n);
  for (std::size_t t = 0; t < n; ++t) p[t] = c * static_cast<double>(t);
  return p;
}

double fgn_gamma(double h, double lag) {
  const double e = 2.0 * h;
  return 0.5 * (std::pow(lag + 1.0, e) - 2.0 * std::pow(lag, e) + std::pow(std::abs(lag - 1.0), e));
}

}  // namespace

TEST_SUITE("scaling") {

TEST_CASE("q-moment of a linear log-price") {
  const auto p = linear_path(300, 0.37);
  for (double q : {0.5, 1.0, 2.0, 3.0}) {
    for (int l : {1, 2, 7, 19}) {
      CHECK(q_moment(p, q, l).value == doctest::Approx(std::pow(0.37 * l, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("q-moment at scale one is the mean absolute return power") {
  const auto r = test_util::gaussian(1000, 3);
  const auto p = market::cumulative_log_price(r);
  double s = 0.0;
  for (double v : r) s += std::pow(std::abs(v), 1.5);
  CHECK(q_moment(p, 1.5, 1).value == doctest::Approx(s / 1000.0).epsilon(1e-12));
}

TEST_CASE("q-moment flags constant paths and bad scales") {
  const std::vector<double> flat(50, 2.0);
  CHECK(q_moment(flat, 1.0, 3).degenerate);
  CHECK_THROWS_AS((void)q_moment(flat, 1.0, 0), Error);
  CHECK_THROWS_AS((void)q_moment(flat, 1.0, 50), Error);
}

TEST_CASE("fBm with H = 0.3 has second-moment slope 0.6") {
  std::vector<double> slopes;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = generate_fbm({0.3, 4096, 1000 + s});
    std::vector<double> lx, ly;
    for (int l = 1; l <= 19; ++l) {
      lx.push_back(std::log(l));
      ly.push_back(std::log(q_moment(x, 2.0, l).value));
    }
    slopes.push_back(stats::ols(lx, ly).slope);
  }
  CHECK(stats::mean(slopes) == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("linear log-price is exactly uniscaling for every lmax") {
  const auto est = estimate_ghe(linear_path(400, 0.01));
  CHECK(est.h(1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(est.h(2.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(delta_h(est)) < 1e-10);
  REQUIRE(est.slopes.cols() == 15);
  for (Eigen::Index j = 0; j < est.slopes.cols(); ++j) {
    CHECK(std::abs(est.slopes(0, j) - 1.0) < 1e-10);
    CHECK(std::abs(est.slopes(1, j) - 2.0) < 1e-10);
  }
}

TEST_CASE("amplitude does not change the exponent") {
  for (double c : {1e-4, 0.3, 25.0}) {
    CHECK(std::abs(estimate_ghe(linear_path(300, c)).h(2.0) - 1.0) < 1e-10);
  }
}

TEST_CASE("slopes matrix shape and recomputation of H and its error") {
  const auto x = generate_fbm({0.6, 2000, 9});
  GheOptions o;
  o.qs = {1.0, 2.0, 3.0};
  o.lmax_min = 6;
  o.lmax_max = 12;
  const auto est = estimate_ghe(x, o);
  REQUIRE(est.slopes.rows() == 3);
  REQUIRE(est.slopes.cols() == 7);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < 7; ++j) row.push_back(est.slopes(static_cast<Eigen::Index>(k), j) / o.qs[k]);
    CHECK(est.hurst[k] == doctest::Approx(stats::mean(row)).epsilon(1e-14));
    CHECK(est.std_errors[k] == doctest::Approx(stats::sample_sd(row)).epsilon(1e-12));
  }
  // Column j is the OLS over l = 1..lmax_min + j.
  std::vector<double> lx, ly;
  for (int l = 1; l <= 9; ++l) {
    lx.push_back(std::log(l));
    ly.push_back(std::log(q_moment(x, 2.0, l).value));
  }
  CHECK(est.slopes(1, 3) == doctest::Approx(stats::ols(lx, ly).slope).epsilon(1e-12));
}

TEST_CASE("estimate_ghe preconditions") {
  CHECK_THROWS_AS((void)estimate_ghe(linear_path(189, 1.0)), Error);  // below 10 * lmax_max
  CHECK_NOTHROW((void)estimate_ghe(linear_path(190, 1.0)));
  CHECK_THROWS_AS((void)estimate_ghe(std::vector<double>(500, 1.0)), Error);
  GheOptions bad;
  bad.lmax_min = 10;
  bad.lmax_max = 9;
  CHECK_THROWS_AS((void)estimate_ghe(linear_path(500, 1.0), bad), Error);
}

TEST_CASE("white-noise returns are uniscaling with H = 1/2") {
  std::vector<double> h1, h2, dh;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto est = estimate_ghe(market::cumulative_log_price(test_util::gaussian(4026, 500 + s)));
    h1.push_back(est.h(1.0));
    h2.push_back(est.h(2.0));
    dh.push_back(delta_h(est));
  }
  CHECK(std::abs(stats::mean(h1) - 0.5) < 0.03);
  CHECK(std::abs(stats::mean(h2) - 0.5) < 0.03);
  CHECK(std::abs(stats::mean(dh)) < 0.015);
}

TEST_CASE("lognormal cascade with a single leaf is multifractal") {
  const hierarchy::Dendrogram leaf({"X"}, {});
  dhm::DhmSpec spec;
  spec.sigma.assets = {"X"};
  spec.sigma.values = Matrix::Identity(1, 1);
  spec.regimes.push_back({dhm::RiskTree::constant(leaf, 0.0), 4026});
  int above = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    spec.seed = 7000 + s;
    const auto r = dhm::simulate_returns(spec, {false}).returns.values;
    std::vector<double> col(r.data(), r.data() + r.rows());
    above += delta_h(estimate_ghe(market::cumulative_log_price(col))) > 0.015 ? 1 : 0;
  }
  MESSAGE("cascade realizations above 0.015: " << above << "/100");
  CHECK(above >= 80);
}

TEST_CASE("delta_h is H(1) - H(2)") {
  GheEstimate est;
  est.qs = {1.0, 2.0};
  est.hurst = {0.55, 0.50};
  CHECK(delta_h(est) == doctest::Approx(0.05).epsilon(1e-12));
  est.hurst = {0.5, 0.5};
  CHECK(delta_h(est) == 0.0);
  est.qs = {2.0, 3.0};
  CHECK_THROWS_AS((void)delta_h(est), Error);
}

TEST_CASE("fBm with H = 1/2 has uncorrelated increments") {
  const auto x = generate_fbm({0.5, 20000, 77});
  std::vector<double> inc(x.size() - 1);
  for (std::size_t t = 0; t + 1 < x.size(); ++t) inc[t] = x[t + 1] - x[t];
  const double m = stats::mean(inc);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t t = 0; t < inc.size(); ++t) c0 += (inc[t] - m) * (inc[t] - m);
  for (std::size_t t = 0; t + 1 < inc.size(); ++t) c1 += (inc[t] - m) * (inc[t + 1] - m);
  CHECK(std::abs(c1 / c0) < 3.0 / std::sqrt(static_cast<double>(inc.size())));
}

TEST_CASE("fGn autocovariance matches the closed form") {
  for (std::size_t lag = 0; lag < 5; ++lag) {
    CHECK(fgn_autocovariance(0.7, lag) == doctest::Approx(fgn_gamma(0.7, static_cast<double>(lag))).epsilon(1e-12));
  }
  const auto x = generate_fbm({0.7, 1 << 14, 2024});
  CHECK(x.size() == (1u << 14));
  CHECK(x[0] == 0.0);
  std::vector<double> inc(x.size() - 1);
  for (std::size_t t = 0; t + 1 < x.size(); ++t) inc[t] = x[t + 1] - x[t];
  const double m = stats::mean(inc);
  for (std::size_t h = 1; h <= 10; ++h) {
    double c = 0.0;
    for (std::size_t t = 0; t + h < inc.size(); ++t) c += (inc[t] - m) * (inc[t + h] - m);
    c /= static_cast<double>(inc.size());
    CHECK(std::abs(c - fgn_gamma(0.7, static_cast<double>(h))) < 0.02);
  }
}

TEST_CASE("fBm generation is deterministic per seed") {
  CHECK(generate_fbm({0.35, 3000, 5}) == generate_fbm({0.35, 3000, 5}));
  CHECK(generate_fbm({0.35, 3000, 5}) != generate_fbm({0.35, 3000, 6}));
  CHECK_THROWS_AS((void)generate_fbm({1.0, 100, 1}), Error);
  CHECK_THROWS_AS((void)generate_fbm({0.0, 100, 1}), Error);
}

TEST_CASE("Delta H of fBm is centred on zero") {
  std::vector<double> dh;
  for (std::uint64_t s = 0; s < 500; ++s) dh.push_back(delta_h(estimate_ghe(generate_fbm({0.5, 4026, 90000 + s}))));
  CHECK(std::abs(stats::mean(dh)) < 0.005);
}

TEST_CASE("threshold calibration") {
  const auto broad = calibrate_threshold(1000, 0.1, 0.9, 4026, 20240601);
  CHECK(broad.count == 1000);
  CHECK(broad.delta_h.size() == 1000);
  CHECK(broad.threshold == doctest::Approx(stats::quantile(broad.delta_h, 0.975)).epsilon(1e-15));
  CHECK(broad.threshold > 0.0);
  for (double h : broad.hursts) CHECK((h >= 0.1 && h <= 0.9));

  SUBCASE("degenerate Hurst range stays within 20% of the broad range") {
    const auto fixed = calibrate_threshold(1000, 0.5, 0.5, 4026, 20240601);
    CHECK(std::abs(fixed.threshold / broad.threshold - 1.0) <= 0.2);
  }

  SUBCASE("100 and 1000 realizations agree within two bootstrap standard errors") {
    auto boot_se = [](const std::vector<double>& sample, std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
      std::vector<double> qs, draw(sample.size());
      for (int b = 0; b < 500; ++b) {
        for (double& v : draw) v = sample[pick(rng)];
        qs.push_back(stats::quantile(draw, 0.975));
      }
      return stats::sample_sd(qs);
    };
    // A 2 SE band holds in about 95% of independent reruns, so count agreements over 20 of them.
    const double broad_se = boot_se(broad.delta_h, 2);
    int agree = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
      const auto small = calibrate_threshold(100, 0.1, 0.9, 4026, 31337 + k);
      const double se = std::hypot(boot_se(small.delta_h, 100 + k), broad_se);
      agree += std::abs(small.threshold - broad.threshold) <= 2.0 * se ? 1 : 0;
    }
    MESSAGE("count=100 reruns within 2 SE of count=1000: " << agree << "/20");
    CHECK(agree >= 17);
  }

  SUBCASE("same seed, same threshold; result independent of job count") {
    CalibrationOptions opt;
    opt.jobs = 3;
    CHECK(calibrate_threshold(1000, 0.1, 0.9, 4026, 20240601, opt).delta_h == broad.delta_h);
  }
}

TEST_CASE("threshold calibration preconditions") {
  CHECK_THROWS_AS((void)calibrate_threshold(50, 0.1, 0.9, 4026, 1), Error);
  CalibrationOptions low;
  low.allow_low_count = true;
  CHECK(calibrate_threshold(10, 0.1, 0.9, 1000, 1, low).count == 10);
  CHECK_THROWS_AS((void)calibrate_threshold(200, 0.9, 0.1, 4026, 1), Error);
  CHECK_THROWS_AS((void)calibrate_threshold(200, 0.0, 0.9, 4026, 1), Error);
}

}
