#include "hiermf/scaling.hpp"

#include <cmath>
#include <random>

#include "hiermf/gaussian_embedding.hpp"
#include "hiermf/stats.hpp"

namespace hiermf::scaling {

QMoment q_moment(std::span<const double> log_price, double q, int scale) {
  if (!(q > 0.0)) throw Error("q_moment: q must be positive");
  if (scale < 1 || static_cast<std::size_t>(scale) >= log_price.size()) {
    throw Error("q_moment: scale " + std::to_string(scale) + " outside [1, length-1]");
  }
  const auto ell = static_cast<std::size_t>(scale);
  const std::size_t terms = log_price.size() - ell;
  double sum = 0.0;
  bool all_zero = true;
  const bool square = (q == 2.0);
  const bool abs_only = (q == 1.0);
  for (std::size_t t = 0; t < terms; ++t) {
    const double r = std::abs(log_price[t + ell] - log_price[t]);
    if (r != 0.0) all_zero = false;
    sum += square ? r * r : (abs_only ? r : std::pow(r, q));
  }
  return {sum / static_cast<double>(terms), all_zero};
}

double GheEstimate::h(double q) const {
  for (std::size_t k = 0; k < qs.size(); ++k) {
    if (qs[k] == q) return hurst[k];
  }
  throw Error("GHE estimate has no exponent for q = " + format_double(q));
}

GheEstimate estimate_ghe(std::span<const double> log_price, const GheOptions& options) {
  if (options.qs.empty()) throw Error("estimate_ghe: empty q set");
  if (options.lmax_min < 2 || options.lmax_max < options.lmax_min) {
    throw Error("estimate_ghe: invalid lmax range");
  }
  if (log_price.size() < 10 * static_cast<std::size_t>(options.lmax_max)) {
    throw Error("estimate_ghe: series length " + std::to_string(log_price.size()) +
                " shorter than 10 x lmax (" + std::to_string(options.lmax_max) + ")");
  }
  const int lmax = options.lmax_max;
  const auto nfits = static_cast<std::size_t>(options.lmax_max - options.lmax_min + 1);

  std::vector<double> log_scale(static_cast<std::size_t>(lmax));
  for (int l = 1; l <= lmax; ++l) log_scale[static_cast<std::size_t>(l - 1)] = std::log(l);

  GheEstimate est;
  est.qs = options.qs;
  est.lmax_min = options.lmax_min;
  est.lmax_max = options.lmax_max;
  est.slopes.resize(static_cast<Eigen::Index>(options.qs.size()), static_cast<Eigen::Index>(nfits));

  for (std::size_t k = 0; k < options.qs.size(); ++k) {
    const double q = options.qs[k];
    std::vector<double> log_moment(static_cast<std::size_t>(lmax));
    for (int l = 1; l <= lmax; ++l) {
      const QMoment m = q_moment(log_price, q, l);
      if (m.degenerate || m.value <= 0.0) {
        throw Error("estimate_ghe: degenerate moment M(q=" + format_double(q) + ", scale=" +
                    std::to_string(l) + ") = 0");
      }
      log_moment[static_cast<std::size_t>(l - 1)] = std::log(m.value);
    }
    std::vector<double> per_fit(nfits);
    for (std::size_t j = 0; j < nfits; ++j) {
      const auto n = static_cast<std::size_t>(options.lmax_min) + j;
      const auto fit = stats::ols(std::span<const double>(log_scale.data(), n),
                                  std::span<const double>(log_moment.data(), n));
      est.slopes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = fit.slope;
      per_fit[j] = fit.slope / q;
    }
    est.hurst.push_back(stats::mean(per_fit));
    est.std_errors.push_back(nfits > 1 ? stats::sample_sd(per_fit) : 0.0);
  }
  return est;
}

double delta_h(const GheEstimate& estimate) { return estimate.h(1.0) - estimate.h(2.0); }

double fgn_autocovariance(double hurst, std::size_t lag) {
  const double h2 = 2.0 * hurst;
  const double k = static_cast<double>(lag);
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

std::vector<double> generate_fgn(double hurst, std::size_t length, std::uint64_t seed) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw Error("fBm: hurst must lie in (0, 1)");
  if (length < 1) throw Error("fBm: length must be >= 1");
  const std::size_t m = next_power_of_two(std::max<std::size_t>(2, 2 * (length - 1)));
  const CirculantGaussian gen([hurst](std::size_t h) { return fgn_autocovariance(hurst, h); },
                              length, m);
  if (gen.min_eigen_ratio() < -1e-8) {
    throw Error("fBm: circulant embedding has negative eigenvalues (ratio " +
                format_double(gen.min_eigen_ratio()) + ")");
  }
  std::mt19937_64 rng(seed);
  return gen.sample(rng);
}

std::vector<double> generate_fbm(const FbmSpec& spec) {
  if (spec.length < 2) throw Error("fBm: path length must be >= 2");
  const auto increments = generate_fgn(spec.hurst, spec.length - 1, spec.seed);
  std::vector<double> path(spec.length, 0.0);
  for (std::size_t t = 1; t < spec.length; ++t) path[t] = path[t - 1] + increments[t - 1];
  return path;
}

ThresholdCalibration calibrate_threshold(std::size_t count, double hurst_min, double hurst_max,
                                         std::size_t length, std::uint64_t seed,
                                         const CalibrationOptions& options) {
  if (count < 2 || (count < 100 && !options.allow_low_count)) {
    throw Error("calibrate_threshold: count must be >= 100 (got " + std::to_string(count) + ")");
  }
  if (!(hurst_min > 0.0 && hurst_max < 1.0 && hurst_min <= hurst_max)) {
    throw Error("calibrate_threshold: hurst range must satisfy 0 < min <= max < 1");
  }
  ThresholdCalibration cal;
  cal.count = count;
  cal.hurst_min = hurst_min;
  cal.hurst_max = hurst_max;
  cal.length = length;
  cal.seed = seed;
  cal.level = options.level;
  cal.rule = "quantile(level=" + format_double(options.level) +
             ", type 7) of signed Delta H(1,2) over fBm realizations";
  cal.delta_h.resize(count);
  cal.hursts.resize(count);

  parallel_for(count, options.jobs, [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    std::uniform_real_distribution<double> unif(hurst_min, hurst_max);
    const double h = hurst_min == hurst_max ? hurst_min : unif(rng);
    const auto path = generate_fbm({h, length, rng()});
    cal.hursts[i] = h;
    cal.delta_h[i] = delta_h(estimate_ghe(path, options.ghe));
  });
  cal.threshold = stats::quantile(cal.delta_h, options.level);
  return cal;
}

}  // namespace hiermf::scaling
