#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hiermf/common.hpp"
#include "hiermf/market_data.hpp"

namespace hiermf::dependence {

// Normalized exponential weights, w_t proportional to exp((t - window) / theta)
// for t = 1..window, so the most recent observation weighs most.
struct WeightScheme {
  std::size_t window = 0;
  double theta = 0.0;
  std::vector<double> weights;
};

WeightScheme exp_weights(std::size_t window, double theta);
WeightScheme flat_weights(std::size_t window);

// theta = window / 3 rounded down to whole days (1342 for 4026, 250 for 752).
double default_theta(std::size_t window);

struct CorrelationMatrix {
  std::vector<std::string> assets;
  Matrix values;
  std::string scheme = "flat";  // flat | exponential | model
  std::size_t window = 0;
  double theta = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

// Checks unit diagonal, symmetry, entries in [-1,1] and min eigenvalue >= psd_tol.
void validate_correlation(const Matrix& values, double psd_tol = -1e-8);

CorrelationMatrix weighted_pearson_matrix(const market::ReturnsPanel& panel, const WeightScheme& scheme);
Matrix weighted_pearson(const Matrix& values, std::span<const double> weights,
                        const std::vector<std::string>& labels = {});

// Tie-corrected Kendall tau-b in O(n log n) (Knight's merge-count algorithm).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// 2/pi * arcsin(rho): Kendall's tau of an elliptical pair with linear correlation rho.
double elliptical_tau(double rho);

// d_ij = sqrt(2 (1 - rho_ij)).
Matrix corr_to_distance(const Matrix& rho);
Matrix corr_to_distance(const CorrelationMatrix& matrix);

void write_correlation_csv(const std::filesystem::path& path, const CorrelationMatrix& matrix);
CorrelationMatrix load_correlation_csv(const std::filesystem::path& path);

}  // namespace hiermf::dependence
