#pragma once

#include <span>
#include <vector>

namespace hiermf::stats {

double mean(std::span<const double> xs);

// Sample standard deviation with the n-1 normalization. Requires n >= 2.
double sample_sd(std::span<const double> xs);

// Type-7 (linear interpolation between order statistics) quantile, level in [0,1].
double quantile(std::span<const double> xs, double level);
double quantile_sorted(std::span<const double> sorted, double level);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Unweighted ordinary least squares of y on x.
LineFit ols(std::span<const double> x, std::span<const double> y);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace hiermf::stats
