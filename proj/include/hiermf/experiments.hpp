#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hiermf/dendrogram.hpp"
#include "hiermf/dependence.hpp"
#include "hiermf/dhm.hpp"
#include "hiermf/diagnostics.hpp"

// Synthetic-model experiments shared by `validate-model` and the acceptance suite.
// Every experiment is a pure function of its arguments; realization k uses
// derive_seed(setup.seed, k), so results do not depend on the job count.
namespace hiermf::experiments {

struct Setup {
  dependence::CorrelationMatrix sigma;  // noise correlation over the tree's leaves
  dhm::LogVolSpec logvol{};
  std::size_t length = 4026;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

// One-factor correlation with loadings drawn from U[sqrt(lo), sqrt(hi)], so every
// off-diagonal entry lies in [lo, hi].
dependence::CorrelationMatrix random_sigma(const std::vector<std::string>& assets, double lo, double hi,
                                           std::uint64_t seed);

// Flat-weight Pearson matrix of the rows of `returns`.
Matrix sample_correlation(const Matrix& returns);

struct Deviation {
  std::size_t regime = 0;
  std::string a;
  std::string b;
  double sample = 0.0;
  double theory = 0.0;
};

struct EquivalenceResult {
  std::size_t entries = 0;
  double max_deviation = 0.0;
  std::vector<Deviation> failures;  // entries beyond the tolerance
};

// Sample correlation of each regime segment against Sigma_ij * F_ij.
EquivalenceResult compare_with_theory(const dhm::DhmSpec& spec, const dhm::SimulationOutput& out,
                                      double tolerance);

struct EquivalenceSuite {
  std::size_t trees = 50;
  std::size_t min_leaves = 3;
  std::size_t max_leaves = 16;
  std::size_t length = 1'000'000;
  double tolerance = 0.02;
  double sigma_min = 0.2;
  double sigma_max = 0.8;
  dhm::LogVolSpec logvol{};
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct EquivalenceSuiteResult {
  std::vector<EquivalenceResult> per_tree;
  std::size_t entries = 0;
  std::size_t failing = 0;
  double max_deviation = 0.0;
};

// Random trees with p ~ U[0,1] and random one-factor Sigma, one long simulation each.
EquivalenceSuiteResult monte_carlo_equivalence(const EquivalenceSuite& suite);

struct LimitCases {
  double max_deviation_p0 = 0.0;  // max |sample rho - Sigma| with every p = 0
  double max_deviation_p1 = 0.0;  // same with every p = 1
};

LimitCases limit_cases(const hierarchy::Dendrogram& tree, const Setup& setup);

struct MedianShift {
  std::vector<double> hierarchical;  // median off-diagonal correlation per paired run
  std::vector<double> flat;          // same seed, every p = 1
  std::size_t smaller = 0;           // runs where hierarchical < flat
};

MedianShift median_shift(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t runs, double p_min,
                         double p_max);

// RMS over asset pairs of tau_hat - 2/pi arcsin(rho_hat).
double elliptical_rms(const Matrix& returns);

struct Dispersion {
  std::vector<double> hierarchical;
  std::vector<double> flat;
  double mean_hierarchical = 0.0;
  double mean_flat = 0.0;
  double ratio = 0.0;
};

Dispersion tau_rho_dispersion(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t seeds, double p_min,
                              double p_max);

struct OrderTrend {
  diagnostics::OrderProfileStats profile;  // pooled over assets and realizations
  diagnostics::TrendTest trend;            // order against per-order mean Delta H
  std::size_t inversions = 0;              // decreases between consecutive orders
};

// Fresh p ~ U[p_min, p_max] in every realization; unfiltered Delta H.
OrderTrend order_trend(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t realizations, double p_min,
                       double p_max);

struct RegimeShift {
  std::vector<std::string> assets;
  std::vector<int> order_before;
  std::vector<int> order_after;
  std::vector<double> median_before;
  std::vector<double> median_after;
  std::size_t increasing = 0;
  std::size_t increasing_consistent = 0;
  std::size_t decreasing = 0;
  std::size_t decreasing_consistent = 0;
};

// Two consecutive regimes of the given durations; per-asset median Delta H of
// each half across realizations. Probabilities follow assign_regime_probabilities.
RegimeShift two_regime_shift(const hierarchy::Dendrogram& before, const hierarchy::Dendrogram& after,
                             const Setup& setup, std::size_t first_duration, std::size_t realizations, double p_min,
                             double p_max);

// Power-law exponent of the squared-return ACF averaged across assets.
double squared_return_acf_exponent(const Matrix& returns, std::size_t lag_min = 1, std::size_t lag_max = 100);

std::vector<double> acf_exponents(const hierarchy::Dendrogram& tree, const Setup& setup, std::size_t runs,
                                  double p_min, double p_max);

struct HillComparison {
  std::string leaf;
  std::vector<double> hierarchical;
  std::vector<double> baseline;  // every p = 0, same seed
  std::size_t thicker = 0;       // runs with a smaller tail index than the baseline
};

// Deepest leaf of a comb tree with `depth` internal nodes, identity noise correlation.
HillComparison hill_comparison(std::size_t depth, const Setup& setup, std::size_t runs, double p_min, double p_max,
                               double tail_fraction = 0.05);

}  // namespace hiermf::experiments
