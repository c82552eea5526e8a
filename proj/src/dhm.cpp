#include "hiermf/dhm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "hiermf/gaussian_embedding.hpp"
#include "hiermf/hierarchy.hpp"

namespace hiermf::dhm {
namespace {

constexpr double kMaxClippedFraction = 0.01;

std::vector<double> require_probabilities(const hierarchy::Dendrogram& tree) {
  std::vector<double> out;
  for (const auto& node : tree.nodes()) {
    if (!node.p) throw Error("risk tree: node " + std::to_string(node.id) + " has no probability");
    out.push_back(*node.p);
  }
  return out;
}

std::set<std::string> clade_of(const hierarchy::Dendrogram& tree, std::size_t node) {
  std::set<std::string> out;
  for (std::size_t i : tree.leaves_under(node)) out.insert(tree.leaves()[i]);
  return out;
}

}  // namespace

RiskTree::RiskTree(hierarchy::Dendrogram tree) : tree_(std::move(tree)), probs_(require_probabilities(tree_)) {
  for (std::size_t i = 0; i < tree_.leaf_count(); ++i) paths_.push_back(tree_.path(i));
}

RiskTree RiskTree::uniform(const hierarchy::Dendrogram& tree, double p_min, double p_max, std::uint64_t seed) {
  if (!(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max)) throw Error("risk tree: invalid probability range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(p_min, p_max);
  std::vector<double> probs(tree.node_count());
  for (double& p : probs) p = p_min == p_max ? p_min : unif(rng);
  return RiskTree(tree.with_probabilities(probs));
}

RiskTree RiskTree::constant(const hierarchy::Dendrogram& tree, double p) {
  return RiskTree(tree.with_probabilities(std::vector<double>(tree.node_count(), p)));
}

double log_correlated_autocovariance(const LogVolSpec& spec, std::size_t lag) {
  if (spec.horizon < 2 || lag + 1 >= spec.horizon) return 0.0;
  return spec.lambda * spec.lambda *
         std::log(static_cast<double>(spec.horizon) / (1.0 + static_cast<double>(lag)));
}

XiPath simulate_xi(const LogVolSpec& spec, std::size_t length, std::uint64_t seed) {
  if (length < 2) throw Error("simulate_xi: length must be >= 2");
  if (!(spec.lambda >= 0.0) || spec.horizon < 2) throw Error("simulate_xi: need lambda >= 0 and horizon >= 2");
  XiPath out;
  if (spec.lambda == 0.0) {
    out.xi.assign(length, 0.0);
    return out;
  }
  const std::size_t m = next_power_of_two(2 * std::max(length, spec.horizon));
  const CirculantGaussian gen([&spec](std::size_t h) { return log_correlated_autocovariance(spec, h); }, length, m);
  if (gen.clipped_fraction() > kMaxClippedFraction) {
    throw Error("simulate_xi: clipped eigenvalue mass " + format_double(gen.clipped_fraction()) +
                " exceeds 1%; use a larger embedding");
  }
  std::mt19937_64 rng(seed);
  out.xi = gen.sample(rng);
  out.embed_size = m;
  out.clipped_fraction = gen.clipped_fraction();
  out.max_cov_deviation = gen.max_covariance_deviation();
  return out;
}

std::vector<double> simulate_x(std::span<const double> xi) {
  std::vector<double> x(xi.size());
  std::transform(xi.begin(), xi.end(), x.begin(), [](double v) { return std::exp(v); });
  return x;
}

int Activations::active_on_path(std::size_t t, std::span<const std::size_t> path) const {
  const std::uint8_t* row = data_.data() + t * nodes_;
  int count = 0;
  for (std::size_t m : path) count += row[m];
  return count;
}

Activations sample_activations(const RiskTree& tree, std::size_t length, std::uint64_t seed) {
  Activations acts(length, tree.node_count());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t m = 0; m < tree.node_count(); ++m) {
      acts.set(t, m, unif(rng) < tree.p(m) ? 1 : 0);
    }
  }
  return acts;
}

double hierarchical_factor(const RiskTree& tree, const Activations& acts, const std::string& leaf, std::size_t t) {
  const std::size_t i = tree.tree().leaf_index(leaf);
  if (t >= acts.length()) throw Error("hierarchical_factor: time index out of range");
  return std::exp(static_cast<double>(acts.active_on_path(t, tree.path(i))));
}

std::size_t DhmSpec::length() const {
  std::size_t total = 0;
  for (const auto& r : regimes) total += r.duration;
  return total;
}

void DhmSpec::validate() const {
  if (regimes.empty()) throw Error("dhm spec: no regimes");
  const std::size_t n = sigma.size();
  if (n == 0) throw Error("dhm spec: empty noise correlation");
  if (sigma.assets.size() != n) throw Error("dhm spec: sigma needs one label per row");
  for (std::size_t r = 0; r < regimes.size(); ++r) {
    const auto& tree = regimes[r].tree.tree();
    if (tree.leaf_count() != n) {
      throw Error("dhm spec: regime " + std::to_string(r) + " tree has " + std::to_string(tree.leaf_count()) +
                  " leaves but sigma has dimension " + std::to_string(n));
    }
    for (const auto& a : sigma.assets) {
      if (!tree.find_leaf(a)) throw Error("dhm spec: asset '" + a + "' missing from regime " + std::to_string(r) + " tree");
    }
    if (regimes[r].duration == 0) throw Error("dhm spec: regime " + std::to_string(r) + " has zero duration");
  }
  if (length() < 2) throw Error("dhm spec: total length must be >= 2");
}

SigmaFactor factor_correlation(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw Error("sigma is not square");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  const Vector& values = eig.eigenvalues();
  if (values.minCoeff() < -1e-8) {
    throw Error("sigma is not positive semidefinite (min eigenvalue " + format_double(values.minCoeff()) + ")");
  }
  SigmaFactor out;
  const double abs_mass = values.cwiseAbs().sum();
  double neg_mass = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) neg_mass += std::max(-values(k), 0.0);
  out.clipped_mass = abs_mass > 0.0 ? neg_mass / abs_mass : 0.0;

  const Vector clipped = values.cwiseMax(0.0);
  Matrix rebuilt = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  const Vector inv_sd = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
  out.normalized = inv_sd.asDiagonal() * rebuilt * inv_sd.asDiagonal();
  out.normalized = 0.5 * (out.normalized + out.normalized.transpose());
  out.normalized.diagonal().setOnes();

  const Eigen::SelfAdjointEigenSolver<Matrix> eig2(out.normalized);
  const Vector root = eig2.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  out.factor = eig2.eigenvectors() * root.asDiagonal() * eig2.eigenvectors().transpose();
  return out;
}

Matrix one_factor_correlation(std::span<const double> loadings) {
  const auto n = static_cast<Eigen::Index>(loadings.size());
  const Eigen::Map<const Vector> b(loadings.data(), n);
  Matrix out = b * b.transpose();
  out.diagonal().setOnes();
  return out;
}

SimulationOutput simulate_returns(const DhmSpec& spec, const SimulationOptions& options) {
  spec.validate();
  const std::size_t n = spec.sigma.size();
  const std::size_t length = spec.length();

  SimulationOutput out;
  const SigmaFactor sf = factor_correlation(spec.sigma.values);
  out.sigma_clipped_mass = sf.clipped_mass;

  XiPath xi = simulate_xi(spec.logvol, length, derive_seed(spec.seed, 0));
  out.xi_clipped_fraction = xi.clipped_fraction;
  out.xi_max_cov_deviation = xi.max_cov_deviation;
  out.x = simulate_x(xi.xi);
  out.xi = std::move(xi.xi);

  Matrix z(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(n));
  {
    std::mt19937_64 rng(derive_seed(spec.seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index t = 0; t < z.rows(); ++t) {
      for (Eigen::Index i = 0; i < z.cols(); ++i) z(t, i) = normal(rng);
    }
  }
  Matrix eps = z * sf.factor;  // factor is symmetric
  z.resize(0, 0);

  out.returns.assets = spec.sigma.assets;
  out.returns.values.resize(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(n));

  std::size_t offset = 0;
  for (std::size_t r = 0; r < spec.regimes.size(); ++r) {
    const auto& regime = spec.regimes[r];
    Activations acts = sample_activations(regime.tree, regime.duration, derive_seed(spec.seed, 2 + r));
    std::vector<const std::vector<std::size_t>*> paths(n);
    std::size_t max_depth = 0;
    for (std::size_t c = 0; c < n; ++c) {
      paths[c] = &regime.tree.path(regime.tree.tree().leaf_index(spec.sigma.assets[c]));
      max_depth = std::max(max_depth, paths[c]->size());
    }
    std::vector<double> exp_table(max_depth + 1);
    for (std::size_t k = 0; k <= max_depth; ++k) exp_table[k] = std::exp(static_cast<double>(k));

    for (std::size_t t = 0; t < regime.duration; ++t) {
      const std::size_t g = offset + t;
      const auto gi = static_cast<Eigen::Index>(g);
      for (std::size_t c = 0; c < n; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        const int active = acts.active_on_path(t, *paths[c]);
        out.returns.values(gi, ci) = eps(gi, ci) * out.x[g] * exp_table[static_cast<std::size_t>(active)];
      }
    }
    out.activations.push_back(std::move(acts));
    offset += regime.duration;
  }
  if (options.retain_noise) out.noise = std::move(eps);
  return out;
}

double zeta1(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("zeta1: p outside [0, 1]");
  return p * (std::numbers::e - 1.0) + 1.0;
}

double zeta2(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("zeta2: p outside [0, 1]");
  return p * (std::numbers::e * std::numbers::e - 1.0) + 1.0;
}

double perturbation_factor(const RiskTree& tree, std::size_t leaf_i, std::size_t leaf_j) {
  if (leaf_i >= tree.leaf_count() || leaf_j >= tree.leaf_count()) throw Error("perturbation_factor: leaf out of range");
  std::vector<std::size_t> a = tree.path(leaf_i);
  std::vector<std::size_t> b = tree.path(leaf_j);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
  double num = 1.0, den = 1.0;
  for (std::size_t m : diff) {
    // K is deterministic at p = 0 or 1, so the node cancels exactly.
    const double p = tree.p(m);
    if (p == 0.0 || p == 1.0) continue;
    num *= zeta1(p);
    den *= zeta2(p);
  }
  return num / std::sqrt(den);
}

double perturbation_factor(const RiskTree& tree, const std::string& leaf_i, const std::string& leaf_j) {
  if (leaf_i == leaf_j) throw Error("perturbation_factor: leaves must differ");
  return perturbation_factor(tree, tree.tree().leaf_index(leaf_i), tree.tree().leaf_index(leaf_j));
}

Matrix perturbation_matrix(const RiskTree& tree) {
  const auto n = static_cast<Eigen::Index>(tree.leaf_count());
  Matrix f = Matrix::Ones(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      f(i, j) = f(j, i) = perturbation_factor(tree, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return f;
}

dependence::CorrelationMatrix theoretical_correlation(const dependence::CorrelationMatrix& sigma, const RiskTree& tree) {
  const std::size_t n = sigma.size();
  if (tree.leaf_count() != n) throw Error("theoretical_correlation: sigma and tree dimensions differ");
  std::vector<std::size_t> leaf(n);
  for (std::size_t c = 0; c < n; ++c) leaf[c] = tree.tree().leaf_index(sigma.assets[c]);
  dependence::CorrelationMatrix out;
  out.assets = sigma.assets;
  out.scheme = "model";
  out.values = sigma.values;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = sigma.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                       perturbation_factor(tree, leaf[i], leaf[j]);
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
    out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return out;
}

std::vector<RiskTree> assign_regime_probabilities(const std::vector<hierarchy::Dendrogram>& trees, double p_min,
                                                  double p_max, std::uint64_t seed) {
  if (!(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max)) throw Error("invalid probability range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(p_min, p_max);
  std::vector<RiskTree> out;
  std::map<std::set<std::string>, double> previous;
  for (const auto& tree : trees) {
    std::map<std::set<std::string>, double> current;
    std::vector<double> probs(tree.node_count());
    for (std::size_t k = 0; k < tree.node_count(); ++k) {
      auto clade = clade_of(tree, k);
      const auto it = previous.find(clade);
      probs[k] = it != previous.end() ? it->second : (p_min == p_max ? p_min : unif(rng));
      current.emplace(std::move(clade), probs[k]);
    }
    out.emplace_back(tree.with_probabilities(probs));
    previous = std::move(current);
  }
  return out;
}

}  // namespace hiermf::dhm
