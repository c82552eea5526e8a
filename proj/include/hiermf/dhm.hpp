#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hiermf/common.hpp"
#include "hiermf/dendrogram.hpp"
#include "hiermf/dependence.hpp"
#include "hiermf/kv_config.hpp"
#include "hiermf/market_data.hpp"

// Dynamical hierarchical model: r_{i,t} = eps_{i,t} * x_t * prod_{m in path(i)} e^{K_{m,t}},
// eps_t ~ N(0, Sigma), x_t = e^{xi_t} with log-correlated xi, K_{m,t} ~ Bernoulli(p_m).
namespace hiermf::dhm {

// A dendrogram whose every internal node carries a risk probability p_m.
class RiskTree {
 public:
  explicit RiskTree(hierarchy::Dendrogram tree);

  static RiskTree uniform(const hierarchy::Dendrogram& tree, double p_min, double p_max, std::uint64_t seed);
  static RiskTree constant(const hierarchy::Dendrogram& tree, double p);

  const hierarchy::Dendrogram& tree() const { return tree_; }
  double p(std::size_t node) const { return probs_[node]; }
  const std::vector<double>& probabilities() const { return probs_; }
  // Node indices on each leaf's path (deepest first), aligned with tree().leaves().
  const std::vector<std::size_t>& path(std::size_t leaf) const { return paths_[leaf]; }
  std::size_t leaf_count() const { return tree_.leaf_count(); }
  std::size_t node_count() const { return tree_.node_count(); }

 private:
  hierarchy::Dendrogram tree_;
  std::vector<double> probs_;
  std::vector<std::vector<std::size_t>> paths_;
};

struct LogVolSpec {
  double lambda = 0.2;        // intermittency
  std::size_t horizon = 800;  // decorrelation horizon T, in days
};

// lambda^2 log(T / (1 + lag)) for lag < T - 1, else 0.
double log_correlated_autocovariance(const LogVolSpec& spec, std::size_t lag);

struct XiPath {
  std::vector<double> xi;
  std::size_t embed_size = 0;
  double clipped_fraction = 0.0;
  double max_cov_deviation = 0.0;
};

XiPath simulate_xi(const LogVolSpec& spec, std::size_t length, std::uint64_t seed);
std::vector<double> simulate_x(std::span<const double> xi);

// K_{m,t} draws, time-major. A node's draw is shared by every leaf below it.
class Activations {
 public:
  Activations() = default;
  Activations(std::size_t length, std::size_t nodes) : length_(length), nodes_(nodes), data_(length * nodes, 0) {}

  std::size_t length() const { return length_; }
  std::size_t nodes() const { return nodes_; }
  std::uint8_t at(std::size_t t, std::size_t node) const { return data_[t * nodes_ + node]; }
  void set(std::size_t t, std::size_t node, std::uint8_t v) { data_[t * nodes_ + node] = v; }
  int active_on_path(std::size_t t, std::span<const std::size_t> path) const;

  friend bool operator==(const Activations&, const Activations&) = default;

 private:
  std::size_t length_ = 0;
  std::size_t nodes_ = 0;
  std::vector<std::uint8_t> data_;
};

Activations sample_activations(const RiskTree& tree, std::size_t length, std::uint64_t seed);

// Y^{(i)}_t = prod over the leaf's path of e^{K_{m,t}} = e^{active ancestors}.
double hierarchical_factor(const RiskTree& tree, const Activations& acts, const std::string& leaf, std::size_t t);

struct Regime {
  RiskTree tree;
  std::size_t duration = 0;
};

struct DhmSpec {
  dependence::CorrelationMatrix sigma;  // noise correlation; columns follow sigma.assets
  std::vector<Regime> regimes;
  LogVolSpec logvol{};
  std::uint64_t seed = 0;

  std::size_t length() const;
  void validate() const;
};

struct SimulationOptions {
  bool retain_noise = true;  // keep eps for reconstruction checks
};

struct SimulationOutput {
  market::ReturnsPanel returns;
  std::vector<Activations> activations;  // one per regime, local time index
  std::vector<double> xi;
  std::vector<double> x;
  Matrix noise;  // eps, rows = time (empty unless retained)
  double sigma_clipped_mass = 0.0;
  double xi_clipped_fraction = 0.0;
  double xi_max_cov_deviation = 0.0;
};

SimulationOutput simulate_returns(const DhmSpec& spec, const SimulationOptions& options = {});

// Factor S with S S^T = Sigma after clipping negative eigenvalues and
// restoring the unit diagonal. Throws if Sigma is not PSD within -1e-8.
struct SigmaFactor {
  Matrix factor;
  Matrix normalized;
  double clipped_mass = 0.0;
};
SigmaFactor factor_correlation(const Matrix& sigma);

// Sigma_ij = b_i b_j off the diagonal, 1 on it: a valid correlation matrix.
Matrix one_factor_correlation(std::span<const double> loadings);

// E[e^K] and E[e^{2K}] for K ~ Bernoulli(p).
double zeta1(double p);
double zeta2(double p);

double perturbation_factor(const RiskTree& tree, std::size_t leaf_i, std::size_t leaf_j);
double perturbation_factor(const RiskTree& tree, const std::string& leaf_i, const std::string& leaf_j);
// F_ij for every pair, leaf order of the tree, unit diagonal.
Matrix perturbation_matrix(const RiskTree& tree);

// Entrywise Sigma_ij * F_ij with unit diagonal, in sigma's asset order.
dependence::CorrelationMatrix theoretical_correlation(const dependence::CorrelationMatrix& sigma, const RiskTree& tree);

// Probabilities for successive regimes: nodes whose clade already existed in
// the previous regime keep their p, new nodes draw p ~ U[p_min, p_max].
std::vector<RiskTree> assign_regime_probabilities(const std::vector<hierarchy::Dendrogram>& trees, double p_min,
                                                  double p_max, std::uint64_t seed);

// Key-value spec:
//   sigma = <correlation csv> | sigma_constant = <rho> | (default identity)
//   regime = <dendrogram json> <days>     (one line per regime, in order)
//   p_min, p_max (default 0, 1) for nodes without p; p_constant overrides all
//   lambda (0.2), horizon (800), seed
DhmSpec load_dhm_spec(const KeyValueConfig& config);

void write_simulation(const std::filesystem::path& dir, const DhmSpec& spec, const SimulationOutput& out,
                      const io::Json& config_record);

}  // namespace hiermf::dhm
