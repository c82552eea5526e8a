#include "hiermf/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "hiermf/io.hpp"

namespace hiermf::dependence {
namespace {

// Counts pairs i<j with a[i] == a[j] over a sorted run structure.
std::uint64_t tied_pairs(std::span<const double> sorted) {
  std::uint64_t ties = 0, run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Stable merge sort of `v`, returning the number of inversions (strict).
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

WeightScheme exp_weights(std::size_t window, double theta) {
  if (window < 2) throw Error("exp_weights: window must be >= 2");
  if (!(theta > 0.0)) throw Error("exp_weights: theta must be positive");
  WeightScheme s;
  s.window = window;
  s.theta = theta;
  s.weights.resize(window);
  for (std::size_t t = 1; t <= window; ++t) {
    s.weights[t - 1] = std::exp((static_cast<double>(t) - static_cast<double>(window)) / theta);
  }
  const double total = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
  for (double& w : s.weights) w /= total;
  return s;
}

WeightScheme flat_weights(std::size_t window) {
  if (window < 2) throw Error("flat_weights: window must be >= 2");
  WeightScheme s;
  s.window = window;
  s.theta = std::numeric_limits<double>::infinity();
  s.weights.assign(window, 1.0 / static_cast<double>(window));
  return s;
}

double default_theta(std::size_t window) { return std::floor(static_cast<double>(window) / 3.0); }

void validate_correlation(const Matrix& values, double psd_tol) {
  if (values.rows() != values.cols()) throw Error("correlation matrix is not square");
  const Eigen::Index n = values.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (values(i, i) != 1.0) throw Error("correlation matrix: diagonal entry " + std::to_string(i) + " is not 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = values(i, j);
      if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
        throw Error("correlation matrix: entry (" + std::to_string(i) + "," + std::to_string(j) +
                    ") outside [-1, 1]");
      }
      if (std::abs(v - values(j, i)) > 1e-12) throw Error("correlation matrix is not symmetric");
    }
  }
  if (n > 0) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(values, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < psd_tol) {
      throw Error("correlation matrix is not positive semidefinite (min eigenvalue " +
                  format_double(eig.eigenvalues().minCoeff()) + ")");
    }
  }
}

Matrix weighted_pearson(const Matrix& values, std::span<const double> weights,
                        const std::vector<std::string>& labels) {
  if (static_cast<std::size_t>(values.rows()) != weights.size()) {
    throw Error("weighted_pearson: weight count " + std::to_string(weights.size()) + " != row count " +
                std::to_string(values.rows()));
  }
  const Eigen::Map<const Vector> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const double wsum = w.sum();
  const Eigen::RowVectorXd means = (w.transpose() * values) / wsum;
  Matrix centered = values.rowwise() - means;
  centered.array().colwise() *= (w / wsum).array().sqrt();
  Matrix cov = centered.transpose() * centered;
  const Eigen::Index n = cov.rows();
  Vector inv_sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(cov(i, i) > 0.0)) {
      const std::string name = static_cast<std::size_t>(i) < labels.size() ? labels[static_cast<std::size_t>(i)]
                                                                          : std::to_string(i);
      throw Error("weighted_pearson: zero weighted variance in column '" + name + "'");
    }
    inv_sd(i) = 1.0 / std::sqrt(cov(i, i));
  }
  Matrix rho = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::clamp(0.5 * (rho(i, j) + rho(j, i)), -1.0, 1.0);
      rho(i, j) = v;
      rho(j, i) = v;
    }
    rho(i, i) = 1.0;
  }
  return rho;
}

CorrelationMatrix weighted_pearson_matrix(const market::ReturnsPanel& panel, const WeightScheme& scheme) {
  if (scheme.weights.size() != panel.rows()) {
    throw Error("weighted_pearson_matrix: scheme length " + std::to_string(scheme.weights.size()) +
                " != panel rows " + std::to_string(panel.rows()));
  }
  CorrelationMatrix out;
  out.assets = panel.assets;
  out.values = weighted_pearson(panel.values, scheme.weights, panel.assets);
  out.scheme = std::isinf(scheme.theta) ? "flat" : "exponential";
  out.window = scheme.window;
  out.theta = scheme.theta;
  return out;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("kendall_tau: length mismatch");
  if (x.size() < 2) throw Error("kendall_tau: need at least 2 observations");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t tx = tied_pairs(xs);
  std::uint64_t txy = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
      ++run;
    } else {
      txy += run * (run - 1) / 2;
      run = 1;
    }
  }
  std::vector<double> scratch(n);
  const std::uint64_t swaps = merge_count(ys, scratch, 0, n);
  const std::uint64_t ty = tied_pairs(ys);
  if (tx == n0 || ty == n0) throw Error("kendall_tau: undefined for constant input");
  // concordant - discordant = n0 - tx - ty + txy - 2 * discordant
  const double numer = static_cast<double>(n0) - static_cast<double>(tx) - static_cast<double>(ty) +
                       static_cast<double>(txy) - 2.0 * static_cast<double>(swaps);
  const double denom = std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
  return numer / denom;
}

double elliptical_tau(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error("elliptical_tau: |rho| > 1");
  return 2.0 / std::numbers::pi * std::asin(rho);
}

Matrix corr_to_distance(const Matrix& rho) {
  Matrix d = (2.0 * (1.0 - rho.array()).max(0.0)).sqrt().matrix();
  d.diagonal().setZero();
  return d;
}

Matrix corr_to_distance(const CorrelationMatrix& matrix) { return corr_to_distance(matrix.values); }

void write_correlation_csv(const std::filesystem::path& path, const CorrelationMatrix& matrix) {
  std::string text = "asset";
  for (const auto& a : matrix.assets) text += "," + a;
  text += "\n";
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    text += matrix.assets[i];
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      text += "," + format_double(matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    text += "\n";
  }
  io::write_text_atomic(path, text);
  io::Json side;
  side["scheme"] = matrix.scheme;
  side["window"] = matrix.window;
  side["theta"] = std::isinf(matrix.theta) ? io::Json("inf") : io::Json(matrix.theta);
  io::write_sidecar(path, side);
}

CorrelationMatrix load_correlation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty correlation file");
  auto header = io::split_csv_line(line, ',');
  CorrelationMatrix m;
  m.assets.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(m.assets.size());
  m.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw LocatedError(path.string() + ":" + std::to_string(i + 2), "missing row");
    auto cells = io::split_csv_line(line, ',');
    if (static_cast<Eigen::Index>(cells.size()) != n + 1 || cells[0] != m.assets[static_cast<std::size_t>(i)]) {
      throw LocatedError(path.string() + ":" + std::to_string(i + 2), "malformed correlation row");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      try {
        m.values(i, j) = std::stod(cells[static_cast<std::size_t>(j + 1)]);
      } catch (const std::exception&) {
        throw LocatedError(path.string() + ":" + std::to_string(i + 2), "non-numeric entry");
      }
    }
  }
  const auto side = io::sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const auto j = io::read_json(side);
    m.scheme = j.value("scheme", "flat");
    m.window = j.value("window", std::size_t{0});
    if (j.contains("theta") && j["theta"].is_number()) m.theta = j["theta"].get<double>();
  } else {
    m.scheme = "model";
  }
  return m;
}

}  // namespace hiermf::dependence
