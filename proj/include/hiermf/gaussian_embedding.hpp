#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace hiermf {

// Exact sampler for a stationary Gaussian sequence with a prescribed
// autocovariance, by embedding the covariance in a circulant matrix and
// diagonalizing it with the FFT. Negative embedding eigenvalues are clipped to
// zero; the clipped mass and the resulting covariance error are reported so
// callers can decide whether the embedding is acceptable.
class CirculantGaussian {
 public:
  using Autocovariance = std::function<double(std::size_t lag)>;

  // `length` samples per draw, circulant size `embed_size` >= 2 (length - 1).
  CirculantGaussian(const Autocovariance& gamma, std::size_t length, std::size_t embed_size);

  std::vector<double> sample(std::mt19937_64& rng) const;

  std::size_t length() const { return length_; }
  std::size_t embed_size() const { return embed_size_; }
  // Sum of |negative eigenvalues| over sum of |eigenvalues|.
  double clipped_fraction() const { return clipped_fraction_; }
  // Most negative eigenvalue divided by the largest one (0 if none negative).
  double min_eigen_ratio() const { return min_eigen_ratio_; }
  // max over lags < length of |achieved - target| autocovariance after clipping.
  double max_covariance_deviation() const { return max_cov_deviation_; }

 private:
  std::size_t length_;
  std::size_t embed_size_;
  std::vector<double> scale_;  // sqrt(lambda_k / m)
  double clipped_fraction_ = 0.0;
  double min_eigen_ratio_ = 0.0;
  double max_cov_deviation_ = 0.0;
};

std::size_t next_power_of_two(std::size_t n);

}  // namespace hiermf
