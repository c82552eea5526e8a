#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "hiermf/market_data.hpp"
#include "test_util.hpp"

using namespace hiermf;
using namespace hiermf::market;

TEST_SUITE("market_data") {

TEST_CASE("three-row price file is ingested as is") {
  const auto dir = test_util::scratch("md_three");
  test_util::write(dir / "p.csv", "date,A\n2020-01-01,100\n2020-01-02,110\n2020-01-03,121\n");
  const auto res = load_prices_csv(dir / "p.csv", {});
  REQUIRE(res.series.size() == 1);
  CHECK(res.series[0].ticker == "A");
  CHECK(res.series[0].prices == std::vector<double>{100, 110, 121});
  CHECK(res.dropped.at("A") == 0);
}

TEST_CASE("negative and missing prices are dropped per ticker") {
  const auto dir = test_util::scratch("md_drop");
  test_util::write(dir / "p.csv", "date,A,B\n1,100,5\n2,-3,6\n3,121,\n4,122,7\n");
  const auto res = load_prices_csv(dir / "p.csv", {});
  REQUIRE(res.series.size() == 2);
  CHECK(res.series[0].size() == 3);
  CHECK(res.dropped.at("A") == 1);
  CHECK(res.series[1].size() == 3);
  CHECK(res.dropped.at("B") == 1);

  // Alignment keeps only dates that survive for every ticker: 1 and 4.
  const auto panel = align_returns(res.series);
  CHECK(panel.rows() == 1);
  CHECK(panel.times == std::vector<std::string>{"4"});
  CHECK(panel.values(0, 0) == doctest::Approx(std::log(122.0 / 100.0)));
  CHECK(panel.values(0, 1) == doctest::Approx(std::log(7.0 / 5.0)));
}

TEST_CASE("4026 daily rows give a series of length 4026") {
  const auto dir = test_util::scratch("md_long");
  std::string text = "date,A\n";
  for (int t = 0; t < 4026; ++t) text += "d" + std::to_string(100000 + t) + "," + std::to_string(50 + t % 7) + "\n";
  test_util::write(dir / "p.csv", text);
  const auto res = load_prices_csv(dir / "p.csv", {});
  CHECK(res.series[0].size() == 4026);
}

TEST_CASE("non-monotone dates are reported with their line") {
  const auto dir = test_util::scratch("md_order");
  test_util::write(dir / "p.csv", "date,A\n2020-01-02,1\n2020-01-01,2\n");
  try {
    (void)load_prices_csv(dir / "p.csv", {});
    FAIL("expected an error");
  } catch (const LocatedError& e) {
    CHECK(e.location().find(":3") != std::string::npos);
  }
}

TEST_CASE("unknown ticker column is an error") {
  const auto dir = test_util::scratch("md_col");
  test_util::write(dir / "p.csv", "date,A\n1,1\n2,2\n");
  CsvSchema schema;
  schema.tickers = {"Z"};
  CHECK_THROWS_AS((void)load_prices_csv(dir / "p.csv", schema), Error);
}

TEST_CASE("log returns of exponential prices") {
  const std::vector<double> p{1.0, std::numbers::e, std::numbers::e * std::numbers::e};
  const auto r1 = log_returns(p, 1);
  REQUIRE(r1.size() == 2);
  CHECK(r1[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r1[1] == doctest::Approx(1.0).epsilon(1e-14));
  const auto r2 = log_returns(p, 2);
  REQUIRE(r2.size() == 1);
  CHECK(r2[0] == doctest::Approx(2.0).epsilon(1e-14));
  for (double v : log_returns(std::vector<double>(5, 42.0), 1)) CHECK(v == 0.0);
  CHECK_THROWS_AS((void)log_returns(p, 3), Error);
  CHECK_THROWS_AS((void)log_returns(p, 0), Error);
}

TEST_CASE("scale-l returns telescope from scale-1 returns") {
  std::vector<double> p{10, 11, 9.5, 12, 13.25, 12.5, 14};
  const auto r1 = log_returns(p, 1);
  for (int l = 2; l <= 4; ++l) {
    const auto rl = log_returns(p, l);
    for (std::size_t t = 0; t < rl.size(); ++t) {
      double sum = 0.0;
      for (int k = 0; k < l; ++k) sum += r1[t + static_cast<std::size_t>(k)];
      CHECK(rl[t] == doctest::Approx(sum).epsilon(1e-14));
    }
  }
}

TEST_CASE("cumulative log returns reconstruct prices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> p(500);
  for (double& v : p) v = 100.0 * u(rng);
  const auto path = cumulative_log_price(log_returns(p, 1));
  REQUIRE(path.size() == p.size());
  for (std::size_t t = 0; t < p.size(); ++t) CHECK(std::abs(p[0] * std::exp(path[t]) / p[t] - 1.0) < 1e-12);
}

TEST_CASE("rolling window layout") {
  CHECK(window_starts(100, {100, 1}) == std::vector<std::size_t>{0});
  CHECK(window_stride(4026, {752, 50}) == 66);
  const auto starts = window_starts(4026, {752, 50});
  CHECK(starts.size() == 50);
  CHECK(starts.back() == 4026 - 752);
  CHECK(window_starts(10, {4, 3}) == std::vector<std::size_t>{0, 3, 6});
  CHECK_THROWS_AS((void)window_starts(10, {11, 1}), Error);
  CHECK_THROWS_AS((void)window_starts(10, {0, 1}), Error);
  // Stride longer than the window would leave gaps.
  CHECK_THROWS_AS((void)window_starts(100, {10, 3}), Error);
}

TEST_CASE("windows cover the whole index range") {
  for (const auto& [n, spec] : std::vector<std::pair<std::size_t, WindowSpec>>{
           {4026, {752, 50}}, {10, {4, 3}}, {101, {20, 9}}, {37, {30, 4}}, {37, {37, 1}}}) {
    std::set<std::size_t> covered;
    for (std::size_t s : window_starts(n, spec)) {
      for (std::size_t t = s; t < s + spec.length; ++t) covered.insert(t);
    }
    CHECK(covered.size() == n);
  }
  CHECK_THROWS_AS((void)window_starts(37, {37, 4}), Error);
}

TEST_CASE("rolling windows are row slices") {
  ReturnsPanel panel;
  panel.assets = {"A", "B"};
  panel.values = Matrix(10, 2);
  for (int t = 0; t < 10; ++t) panel.values.row(t) << t, -t;
  const auto windows = rolling_windows(panel, {4, 3});
  REQUIRE(windows.size() == 3);
  CHECK(windows[1].values(0, 0) == 3.0);
  CHECK(windows[2].values(3, 1) == -9.0);
}

TEST_CASE("returns csv round trip") {
  const auto dir = test_util::scratch("md_returns");
  ReturnsPanel panel;
  panel.assets = {"A", "B"};
  panel.times = {"d1", "d2", "d3"};
  panel.values = Matrix(3, 2);
  panel.values << 0.1, -0.2, 1e-17, 0.3333333333333333, -5.5, 2.0;
  write_returns_csv(dir / "r.csv", panel, {{"source", "test"}});
  const auto back = load_returns_csv(dir / "r.csv", {});
  CHECK(back.assets == panel.assets);
  CHECK(back.times == panel.times);
  CHECK(back.values == panel.values);
  CHECK(io::read_json(io::sidecar_path(dir / "r.csv"))["source"] == "test");
}

}
