#include "hiermf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hiermf/hierarchy.hpp"
#include "hiermf/market_data.hpp"
#include "hiermf/scaling.hpp"
#include "hiermf/stats.hpp"

namespace hiermf::experiments {

namespace {

// Realization k draws its simulation seed and its probability seed from
// disjoint slots of the setup seed.
std::uint64_t sim_seed(std::uint64_t seed, std::size_t k) { return derive_seed(seed, 2 * k); }
std::uint64_t prob_seed(std::uint64_t seed, std::size_t k) { return derive_seed(seed, 2 * k + 1); }

dhm::DhmSpec single_regime(const Setup& setup, dhm::RiskTree tree, std::uint64_t seed) {
  dhm::DhmSpec spec;
  spec.sigma = setup.sigma;
  spec.logvol = setup.logvol;
  spec.seed = seed;
  spec.regimes.push_back({std::move(tree), setup.length});
  return spec;
}

Matrix simulate(const dhm::DhmSpec& spec) { return dhm::simulate_returns(spec, {false}).returns.values; }

std::vector<double> column(const Matrix& m, Eigen::Index c, Eigen::Index begin = 0, Eigen::Index rows = -1) {
  if (rows < 0) rows = m.rows() - begin;
  std::vector<double> out(static_cast<std::size_t>(rows));
  for (Eigen::Index t = 0; t < rows; ++t) out[static_cast<std::size_t>(t)] = m(begin + t, c);
  return out;
}

double median_off_diagonal(const Matrix& corr) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < corr.cols(); ++j) v.push_back(corr(i, j));
  }
  return stats::quantile(v, 0.5);
}

double delta_h_of_returns(std::span<const double> returns) {
  return scaling::delta_h(scaling::estimate_ghe(market::cumulative_log_price(returns)));
}

}  // namespace

dependence::CorrelationMatrix random_sigma(const std::vector<std::string>& assets, double lo, double hi,
                                           std::uint64_t seed) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw Error("random_sigma: need 0 <= lo <= hi <= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(std::sqrt(lo), std::sqrt(hi));
  std::vector<double> loadings(assets.size());
  for (double& b : loadings) b = unif(rng);
  dependence::CorrelationMatrix out;
  out.assets = assets;
  out.values = dhm::one_factor_correlation(loadings);
  out.scheme = "model";
  return out;
}

Matrix sample_correlation(const Matrix& returns) {
  const auto w = dependence::flat_weights(static_cast<std::size_t>(returns.rows()));
  return dependence::weighted_pearson(returns, w.weights);
}

EquivalenceResult compare_with_theory(const dhm::DhmSpec& spec, const dhm::SimulationOutput& out, double tolerance) {
  EquivalenceResult result;
  const auto& assets = spec.sigma.assets;
  Eigen::Index offset = 0;
  for (std::size_t r = 0; r < spec.regimes.size(); ++r) {
    const auto rows = static_cast<Eigen::Index>(spec.regimes[r].duration);
    const Matrix sample = sample_correlation(out.returns.values.middleRows(offset, rows));
    const Matrix theory = dhm::theoretical_correlation(spec.sigma, spec.regimes[r].tree).values;
    for (Eigen::Index i = 0; i < sample.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < sample.cols(); ++j) {
        const double dev = std::abs(sample(i, j) - theory(i, j));
        ++result.entries;
        result.max_deviation = std::max(result.max_deviation, dev);
        if (!(dev <= tolerance)) {
          result.failures.push_back({r, assets[static_cast<std::size_t>(i)], assets[static_cast<std::size_t>(j)],
                                     sample(i, j), theory(i, j)});
        }
      }
    }
    offset += rows;
  }
  return result;
}

EquivalenceSuiteResult monte_carlo_equivalence(const EquivalenceSuite& suite) {
  if (suite.min_leaves < 2 || suite.max_leaves < suite.min_leaves) throw Error("equivalence suite: bad leaf range");
  EquivalenceSuiteResult result;
  result.per_tree.resize(suite.trees);
  parallel_for(suite.trees, suite.jobs, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(suite.seed, k));
    std::uniform_int_distribution<std::size_t> leaves_dist(suite.min_leaves, suite.max_leaves);
    const std::size_t n = leaves_dist(rng);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("L" + std::to_string(i));
    const auto tree = hierarchy::random_dendrogram(labels, rng());
    const auto risk = dhm::RiskTree::uniform(tree, 0.0, 1.0, rng());
    Setup setup;
    setup.sigma = random_sigma(labels, suite.sigma_min, suite.sigma_max, rng());
    setup.logvol = suite.logvol;
    setup.length = suite.length;
    const auto spec = single_regime(setup, risk, rng());
    result.per_tree[k] = compare_with_theory(spec, dhm::simulate_returns(spec, {false}), suite.tolerance);
  });
  for (const auto& r : result.per_tree) {
    result.entries += r.entries;
    result.failing += r.failures.size();
    result.max_deviation = std::max(result.max_deviation, r.max_deviation);
  }
  return result;
}

LimitCases limit_cases(const hierarchy::Dendrogram& tree, const Setup& setup) {
  LimitCases out;
  for (double p : {0.0, 1.0}) {
    const Matrix sample = sample_correlation(simulate(single_regime(setup, dhm::RiskTree::constant(tree, p), setup.seed)));
    const double dev = (sample - setup.sigma.values).cwiseAbs().maxCoeff();
    (p == 0.0 ? out.max_deviation_p0 : out.max_deviation_p1) = dev;
  }
  return out;
}

MedianShift median_shift(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t runs, double p_min,
                         double p_max) {
  MedianShift out;
  out.hierarchical.resize(runs);
  out.flat.resize(runs);
  parallel_for(runs, setup.jobs, [&](std::size_t k) {
    const auto seed = sim_seed(setup.seed, k);
    const auto risk = dhm::RiskTree::uniform(tree, p_min, p_max, prob_seed(setup.seed, k));
    out.hierarchical[k] = median_off_diagonal(sample_correlation(simulate(single_regime(setup, risk, seed))));
    out.flat[k] = median_off_diagonal(
        sample_correlation(simulate(single_regime(setup, dhm::RiskTree::constant(tree, 1.0), seed))));
  });
  for (std::size_t k = 0; k < runs; ++k) out.smaller += out.hierarchical[k] < out.flat[k] ? 1 : 0;
  return out;
}

double elliptical_rms(const Matrix& returns) {
  const Eigen::Index n = returns.cols();
  if (n < 2) throw Error("elliptical_rms: need at least two assets");
  std::vector<std::vector<double>> cols;
  for (Eigen::Index c = 0; c < n; ++c) cols.push_back(column(returns, c));
  const Matrix rho = sample_correlation(returns);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double tau = dependence::kendall_tau(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      const double d = tau - dependence::elliptical_tau(rho(i, j));
      sum += d * d;
      ++pairs;
    }
  }
  return std::sqrt(sum / static_cast<double>(pairs));
}

Dispersion tau_rho_dispersion(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t seeds, double p_min,
                              double p_max) {
  Dispersion out;
  out.hierarchical.resize(seeds);
  out.flat.resize(seeds);
  parallel_for(seeds, setup.jobs, [&](std::size_t k) {
    const auto seed = sim_seed(setup.seed, k);
    const auto risk = dhm::RiskTree::uniform(tree, p_min, p_max, prob_seed(setup.seed, k));
    out.hierarchical[k] = elliptical_rms(simulate(single_regime(setup, risk, seed)));
    out.flat[k] = elliptical_rms(simulate(single_regime(setup, dhm::RiskTree::constant(tree, 1.0), seed)));
  });
  out.mean_hierarchical = stats::mean(out.hierarchical);
  out.mean_flat = stats::mean(out.flat);
  out.ratio = out.mean_hierarchical / out.mean_flat;
  return out;
}

OrderTrend order_trend(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t realizations, double p_min,
                       double p_max) {
  const auto& assets = setup.sigma.assets;
  const std::size_t n = assets.size();
  std::vector<std::vector<double>> dh(realizations, std::vector<double>(n));
  parallel_for(realizations, setup.jobs, [&](std::size_t k) {
    const auto risk = dhm::RiskTree::uniform(tree, p_min, p_max, prob_seed(setup.seed, k));
    const Matrix r = simulate(single_regime(setup, risk, sim_seed(setup.seed, k)));
    for (std::size_t c = 0; c < n; ++c) dh[k][c] = delta_h_of_returns(column(r, static_cast<Eigen::Index>(c)));
  });

  // Pool every (realization, asset) pair under a unique key so the per-order
  // statistics run over all of them.
  const auto orders = hierarchy::order_profile(tree);
  std::map<std::string, double> pooled_dh;
  std::map<std::string, int> pooled_order;
  for (std::size_t k = 0; k < realizations; ++k) {
    for (std::size_t c = 0; c < n; ++c) {
      const std::string key = std::to_string(k) + "/" + assets[c];
      pooled_dh[key] = dh[k][c];
      pooled_order[key] = orders.at(assets[c]);
    }
  }
  OrderTrend out;
  out.profile = diagnostics::order_conditional_mean(pooled_dh, pooled_order);
  std::vector<double> xs, ys;
  for (const auto& o : out.profile.orders) {
    xs.push_back(o.order);
    ys.push_back(o.mean);
  }
  out.trend = diagnostics::trend_test(xs, ys);
  for (std::size_t i = 1; i < ys.size(); ++i) out.inversions += ys[i] < ys[i - 1] ? 1 : 0;
  return out;
}

RegimeShift two_regime_shift(const hierarchy::Dendrogram& before, const hierarchy::Dendrogram& after,
                             const Setup& setup, std::size_t first_duration, std::size_t realizations, double p_min,
                             double p_max) {
  if (first_duration == 0 || first_duration >= setup.length) throw Error("two_regime_shift: bad regime durations");
  const auto& assets = setup.sigma.assets;
  const std::size_t n = assets.size();
  const auto d1 = static_cast<Eigen::Index>(first_duration);
  const auto d2 = static_cast<Eigen::Index>(setup.length - first_duration);
  std::vector<std::vector<double>> dh1(n, std::vector<double>(realizations));
  std::vector<std::vector<double>> dh2(n, std::vector<double>(realizations));
  parallel_for(realizations, setup.jobs, [&](std::size_t k) {
    const auto risk = dhm::assign_regime_probabilities({before, after}, p_min, p_max, prob_seed(setup.seed, k));
    dhm::DhmSpec spec;
    spec.sigma = setup.sigma;
    spec.logvol = setup.logvol;
    spec.seed = sim_seed(setup.seed, k);
    spec.regimes = {{risk[0], first_duration}, {risk[1], setup.length - first_duration}};
    const Matrix r = simulate(spec);
    for (std::size_t c = 0; c < n; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      dh1[c][k] = delta_h_of_returns(column(r, ci, 0, d1));
      dh2[c][k] = delta_h_of_returns(column(r, ci, d1, d2));
    }
  });

  RegimeShift out;
  const auto o1 = hierarchy::order_profile(before);
  const auto o2 = hierarchy::order_profile(after);
  for (std::size_t c = 0; c < n; ++c) {
    const int a = o1.at(assets[c]);
    const int b = o2.at(assets[c]);
    const double m1 = stats::quantile(dh1[c], 0.5);
    const double m2 = stats::quantile(dh2[c], 0.5);
    out.assets.push_back(assets[c]);
    out.order_before.push_back(a);
    out.order_after.push_back(b);
    out.median_before.push_back(m1);
    out.median_after.push_back(m2);
    if (b > a) {
      ++out.increasing;
      out.increasing_consistent += m2 > m1 ? 1 : 0;
    } else if (b < a) {
      ++out.decreasing;
      out.decreasing_consistent += m2 < m1 ? 1 : 0;
    }
  }
  return out;
}

double squared_return_acf_exponent(const Matrix& returns, std::size_t lag_min, std::size_t lag_max) {
  std::vector<double> mean_acf(lag_max + 1, 0.0);
  for (Eigen::Index c = 0; c < returns.cols(); ++c) {
    std::vector<double> sq = column(returns, c);
    for (double& v : sq) v *= v;
    const auto a = diagnostics::acf(sq, lag_max);
    for (std::size_t h = 0; h <= lag_max; ++h) mean_acf[h] += a[h] / static_cast<double>(returns.cols());
  }
  return diagnostics::fit_powerlaw_decay(mean_acf, lag_min, lag_max);
}

std::vector<double> acf_exponents(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t runs,
                                  double p_min, double p_max) {
  std::vector<double> out(runs);
  parallel_for(runs, setup.jobs, [&](std::size_t k) {
    const auto risk = dhm::RiskTree::uniform(tree, p_min, p_max, prob_seed(setup.seed, k));
    out[k] = squared_return_acf_exponent(simulate(single_regime(setup, risk, sim_seed(setup.seed, k))));
  });
  return out;
}

HillComparison hill_comparison(std::size_t depth, const Setup& setup, std::size_t runs, double p_min, double p_max,
                               double tail_fraction) {
  if (depth < 1) throw Error("hill_comparison: depth must be positive");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i <= depth; ++i) labels.push_back("C" + std::to_string(i));
  const auto comb = hierarchy::comb_dendrogram(labels);

  Setup local = setup;
  local.sigma.assets = labels;
  local.sigma.values = Matrix::Identity(static_cast<Eigen::Index>(depth + 1), static_cast<Eigen::Index>(depth + 1));
  local.sigma.scheme = "model";

  std::size_t deepest = 0;
  const auto orders = comb.orders();
  for (std::size_t i = 1; i < orders.size(); ++i) {
    if (orders[i] > orders[deepest]) deepest = i;
  }
  const auto col = static_cast<Eigen::Index>(deepest);

  HillComparison out;
  out.leaf = labels[deepest];
  out.hierarchical.resize(runs);
  out.baseline.resize(runs);
  parallel_for(runs, setup.jobs, [&](std::size_t k) {
    const auto seed = sim_seed(setup.seed, k);
    const auto risk = dhm::RiskTree::uniform(comb, p_min, p_max, prob_seed(setup.seed, k));
    out.hierarchical[k] = diagnostics::hill_alpha(column(simulate(single_regime(local, risk, seed)), col), tail_fraction);
    out.baseline[k] = diagnostics::hill_alpha(
        column(simulate(single_regime(local, dhm::RiskTree::constant(comb, 0.0), seed)), col), tail_fraction);
  });
  for (std::size_t k = 0; k < runs; ++k) out.thicker += out.hierarchical[k] < out.baseline[k] ? 1 : 0;
  return out;
}

}  // namespace hiermf::experiments
