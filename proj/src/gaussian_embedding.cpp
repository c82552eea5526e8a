#include "hiermf/gaussian_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "hiermf/common.hpp"

namespace hiermf {
namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

ComplexBuffer make_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw Error("fftw_malloc failed");
  return ComplexBuffer(p);
}

// In-place complex DFT of `buf`; sign = FFTW_FORWARD or FFTW_BACKWARD.
void transform(fftw_complex* buf, std::size_t n, int sign) {
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error("fftw planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

CirculantGaussian::CirculantGaussian(const Autocovariance& gamma, std::size_t length,
                                     std::size_t embed_size)
    : length_(length), embed_size_(embed_size) {
  if (length < 1) throw Error("circulant embedding: length must be >= 1");
  if (embed_size < 2 || embed_size < 2 * (length - 1)) {
    throw Error("circulant embedding: embed size must be >= 2 (length - 1)");
  }
  const std::size_t m = embed_size;
  auto buf = make_buffer(m);
  for (std::size_t k = 0; k < m; ++k) {
    buf[k][0] = gamma(std::min(k, m - k));
    buf[k][1] = 0.0;
  }
  transform(buf.get(), m, FFTW_FORWARD);

  double max_eig = 0.0, min_eig = 0.0, neg_mass = 0.0, abs_mass = 0.0;
  std::vector<double> eig(m);
  for (std::size_t k = 0; k < m; ++k) {
    eig[k] = buf[k][0];
    max_eig = std::max(max_eig, eig[k]);
    min_eig = std::min(min_eig, eig[k]);
    abs_mass += std::abs(eig[k]);
    if (eig[k] < 0.0) neg_mass += -eig[k];
  }
  clipped_fraction_ = abs_mass > 0.0 ? neg_mass / abs_mass : 0.0;
  min_eigen_ratio_ = max_eig > 0.0 ? min_eig / max_eig : 0.0;

  scale_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lam = std::max(eig[k], 0.0);
    scale_[k] = std::sqrt(lam / static_cast<double>(m));
    buf[k][0] = lam;
    buf[k][1] = 0.0;
  }
  // achieved circulant row = inverse DFT of the clipped spectrum
  transform(buf.get(), m, FFTW_BACKWARD);
  for (std::size_t h = 0; h < length; ++h) {
    const double achieved = buf[h][0] / static_cast<double>(m);
    max_cov_deviation_ = std::max(max_cov_deviation_, std::abs(achieved - gamma(h)));
  }
}

std::vector<double> CirculantGaussian::sample(std::mt19937_64& rng) const {
  const std::size_t m = embed_size_;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto buf = make_buffer(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    buf[k][0] = scale_[k] * z1;
    buf[k][1] = scale_[k] * z2;
  }
  transform(buf.get(), m, FFTW_FORWARD);
  std::vector<double> out(length_);
  for (std::size_t t = 0; t < length_; ++t) out[t] = buf[t][0];
  return out;
}

}  // namespace hiermf
