#include "hiermf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "hiermf/common.hpp"
#include "hiermf/stats.hpp"

namespace hiermf::diagnostics {

std::size_t OrderProfileStats::total() const {
  std::size_t n = 0;
  for (const auto& o : orders) n += o.count;
  return n;
}

OrderProfileStats order_conditional_mean(const std::map<std::string, double>& delta_h,
                                         const std::map<std::string, int>& orders) {
  if (delta_h.empty()) throw Error("order_conditional_mean: empty input");
  std::map<int, std::vector<double>> groups;
  for (const auto& [asset, dh] : delta_h) {
    const auto it = orders.find(asset);
    if (it == orders.end()) throw Error("order_conditional_mean: no order for asset '" + asset + "'");
    groups[it->second].push_back(dh);
  }
  OrderProfileStats out;
  for (const auto& [order, values] : groups) {
    OrderStat s;
    s.order = order;
    s.count = values.size();
    s.mean = stats::mean(values);
    if (values.size() >= 2) {
      s.sd = stats::sample_sd(values);
      s.se = s.sd / std::sqrt(static_cast<double>(values.size()));
      s.sd_defined = true;
    } else {
      s.sd = s.se = std::numeric_limits<double>::quiet_NaN();
    }
    out.orders.push_back(s);
  }
  return out;
}

TrendTest trend_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("trend_test: length mismatch");
  if (x.size() < 3) throw Error("trend_test: need at least 3 points");
  TrendTest out;
  out.n = x.size();
  out.r = stats::pearson(x, y);
  const double dof = static_cast<double>(out.n - 2);
  if (std::abs(out.r) >= 1.0) {
    out.t = std::copysign(std::numeric_limits<double>::infinity(), out.r);
    out.p_value = 0.0;
    return out;
  }
  out.t = out.r * std::sqrt(dof / (1.0 - out.r * out.r));
  const boost::math::students_t dist(dof);
  out.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t))), 0.0, 1.0);
  return out;
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n == 0 || 4 * max_lag >= n) throw Error("acf: max lag must be below length / 4");
  const double m = stats::mean(series);
  double c0 = 0.0;
  for (double v : series) c0 += (v - m) * (v - m);
  if (c0 == 0.0) throw Error("acf: constant series");
  std::vector<double> out(max_lag + 1);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double c = 0.0;
    for (std::size_t t = 0; t + h < n; ++t) c += (series[t] - m) * (series[t + h] - m);
    out[h] = c / c0;
  }
  return out;
}

double fit_powerlaw_decay(std::span<const double> acf_values, std::size_t lag_min, std::size_t lag_max) {
  if (lag_min < 1 || lag_max <= lag_min || lag_max >= acf_values.size()) {
    throw Error("fit_powerlaw_decay: invalid lag range");
  }
  std::vector<double> lx, ly;
  for (std::size_t h = lag_min; h <= lag_max; ++h) {
    if (!(acf_values[h] > 0.0)) {
      throw Error("fit_powerlaw_decay: non-positive autocorrelation at lag " + std::to_string(h) +
                  "; try a shorter lag range");
    }
    lx.push_back(std::log(static_cast<double>(h)));
    ly.push_back(std::log(acf_values[h]));
  }
  return -stats::ols(lx, ly).slope;
}

double excess_kurtosis(std::span<const double> series) {
  if (series.size() < 4) throw Error("excess_kurtosis: need at least 4 points");
  const double m = stats::mean(series);
  double m2 = 0.0, m4 = 0.0;
  for (double v : series) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(series.size());
  m4 /= static_cast<double>(series.size());
  if (m2 == 0.0) throw Error("excess_kurtosis: zero variance");
  return m4 / (m2 * m2) - 3.0;
}

double hill_alpha(std::span<const double> series, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 0.5)) throw Error("hill_alpha: tail fraction must be in (0, 0.5]");
  std::vector<double> a(series.size());
  std::transform(series.begin(), series.end(), a.begin(), [](double v) { return std::abs(v); });
  const auto k = static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(a.size())));
  if (k < 20 || k + 1 > a.size()) throw Error("hill_alpha: fewer than 20 tail points");
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end(), std::greater<>());
  const double threshold = a[k];
  if (!(threshold > 0.0)) throw Error("hill_alpha: tail threshold is zero");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(a[i] / threshold);
  return static_cast<double>(k) / sum;
}

std::vector<QuantileSummary> quantile_summary(const std::map<std::string, std::vector<double>>& groups,
                                              const std::vector<double>& levels) {
  std::vector<QuantileSummary> out;
  for (const auto& [label, sample] : groups) {
    if (sample.empty()) throw Error("quantile_summary: group '" + label + "' is empty");
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    QuantileSummary s;
    s.group = label;
    s.levels = levels;
    for (double q : levels) s.values.push_back(stats::quantile_sorted(sorted, q));
    out.push_back(std::move(s));
  }
  return out;
}

io::Json to_json(const TrendTest& test) {
  return {{"r", test.r}, {"t", test.t}, {"p_value", test.p_value}, {"n", test.n}};
}

io::Json to_json(const QuantileSummary& summary) {
  return {{"group", summary.group},
          {"levels", summary.levels},
          {"values", summary.values},
          {"convention", "linear interpolation (type 7)"}};
}

std::string to_csv(const OrderProfileStats& stats) {
  std::string text = "order,count,mean_dH,sd,se\n";
  for (const auto& o : stats.orders) {
    text += std::to_string(o.order) + "," + std::to_string(o.count) + "," + format_double(o.mean) + "," +
            (o.sd_defined ? format_double(o.sd) : "") + "," + (o.sd_defined ? format_double(o.se) : "") + "\n";
  }
  return text;
}

}  // namespace hiermf::diagnostics
