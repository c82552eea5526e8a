#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hiermf/common.hpp"

namespace hiermf::scaling {

struct QMoment {
  double value = 0.0;
  bool degenerate = false;  // every increment was zero
};

// M(q, scale): mean of |x[t+scale] - x[t]|^q over all maximally overlapping
// increments of a log-price path.
QMoment q_moment(std::span<const double> log_price, double q, int scale);

struct GheOptions {
  std::vector<double> qs{1.0, 2.0};
  int lmax_min = 5;
  int lmax_max = 19;
};

// Generalized Hurst exponents. `slopes(k, j)` is the OLS slope of log M(q_k, l)
// on log l over l = 1..lmax_j, with lmax_j = lmax_min + j.
struct GheEstimate {
  std::vector<double> qs;
  std::vector<double> hurst;
  std::vector<double> std_errors;
  Matrix slopes;
  int lmax_min = 5;
  int lmax_max = 19;

  double h(double q) const;
};

GheEstimate estimate_ghe(std::span<const double> log_price, const GheOptions& options = {});

// H(1) - H(2); throws if either exponent is missing.
double delta_h(const GheEstimate& estimate);

struct FbmSpec {
  double hurst = 0.5;
  std::size_t length = 0;
  std::uint64_t seed = 0;
};

// Autocovariance of unit-variance fractional Gaussian noise at `lag`.
double fgn_autocovariance(double hurst, std::size_t lag);

// Fractional Gaussian noise increments (exact, circulant embedding).
std::vector<double> generate_fgn(double hurst, std::size_t length, std::uint64_t seed);

// fBm path of `length` points: x[0] = 0 and x[t] = sum of the first t fGn increments.
std::vector<double> generate_fbm(const FbmSpec& spec);

struct ThresholdCalibration {
  std::size_t count = 0;
  double hurst_min = 0.1;
  double hurst_max = 0.9;
  std::size_t length = 0;
  std::uint64_t seed = 0;
  double level = 0.975;
  double threshold = 0.0;
  std::string rule;
  std::vector<double> delta_h;   // per realization, in realization order
  std::vector<double> hursts;    // drawn Hurst parameter per realization
};

struct CalibrationOptions {
  double level = 0.975;
  unsigned jobs = 1;
  bool allow_low_count = false;  // permits count < 100
  GheOptions ghe{};
};

// Simulates `count` fBm paths with Hurst drawn uniformly from [hurst_min,
// hurst_max] and returns the `level` quantile of their Delta H(1,2).
ThresholdCalibration calibrate_threshold(std::size_t count, double hurst_min, double hurst_max,
                                         std::size_t length, std::uint64_t seed,
                                         const CalibrationOptions& options = {});

}  // namespace hiermf::scaling
