#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "hiermf/io.hpp"

namespace hiermf::diagnostics {

struct OrderStat {
  int order = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // NaN when count == 1
  double se = 0.0;  // sd / sqrt(count); NaN when count == 1
  bool sd_defined = false;
};

struct OrderProfileStats {
  std::vector<OrderStat> orders;  // strictly increasing order
  std::size_t total() const;
};

// Mean, n-1 standard deviation and standard error of Delta H per hierarchical order.
OrderProfileStats order_conditional_mean(const std::map<std::string, double>& delta_h,
                                         const std::map<std::string, int>& orders);

struct TrendTest {
  double r = 0.0;
  double t = 0.0;
  double p_value = 1.0;  // two-sided, Student t with n-2 dof
  std::size_t n = 0;
};

TrendTest trend_test(std::span<const double> x, std::span<const double> y);

// Biased (1/N) sample autocorrelation for lags 0..max_lag.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

// -slope of log acf[h] against log h for h in [lag_min, lag_max]; acf indexed by lag.
double fit_powerlaw_decay(std::span<const double> acf_values, std::size_t lag_min = 1, std::size_t lag_max = 100);

double excess_kurtosis(std::span<const double> series);

// Hill estimator on |series|: k / sum log(x_(i) / x_(k+1)), k = floor(fraction * n).
double hill_alpha(std::span<const double> series, double tail_fraction = 0.05);

struct QuantileSummary {
  std::string group;
  std::vector<double> levels;
  std::vector<double> values;
};

std::vector<QuantileSummary> quantile_summary(const std::map<std::string, std::vector<double>>& groups,
                                              const std::vector<double>& levels);

io::Json to_json(const TrendTest& test);
io::Json to_json(const QuantileSummary& summary);
std::string to_csv(const OrderProfileStats& stats);

}  // namespace hiermf::diagnostics
