#include <sstream>

#include "hiermf/dhm.hpp"
#include "hiermf/hierarchy.hpp"
#include "hiermf/io.hpp"

namespace hiermf::dhm {

DhmSpec load_dhm_spec(const KeyValueConfig& config) {
  DhmSpec spec;
  spec.seed = static_cast<std::uint64_t>(config.get_int("seed", 0));
  spec.logvol.lambda = config.get_double("lambda", 0.2);
  spec.logvol.horizon = static_cast<std::size_t>(config.get_int("horizon", 800));

  const auto regime_lines = config.get_all("regime");
  if (regime_lines.empty()) throw Error("dhm config: at least one `regime = <tree.json> <days>` line required");
  std::vector<hierarchy::Dendrogram> trees;
  std::vector<std::size_t> durations;
  for (const auto& line : regime_lines) {
    std::istringstream in(line);
    std::string path;
    long long days = 0;
    if (!(in >> path >> days) || days <= 0) {
      throw LocatedError("regime", "expected `<tree.json> <days>`, got '" + line + "'");
    }
    trees.push_back(hierarchy::parse_dendrogram(config.resolve(path)));
    durations.push_back(static_cast<std::size_t>(days));
  }

  std::vector<RiskTree> risk_trees;
  if (config.has("p_constant")) {
    const double p = config.get_double("p_constant", 0.0);
    for (const auto& t : trees) risk_trees.push_back(RiskTree::constant(t, p));
  } else {
    bool all_set = true;
    for (const auto& t : trees) all_set = all_set && t.has_probabilities();
    if (all_set) {
      for (const auto& t : trees) risk_trees.emplace_back(t);
    } else {
      const auto p_seed = static_cast<std::uint64_t>(
          config.get_int("p_seed", static_cast<std::int64_t>(derive_seed(spec.seed, 99) >> 1)));
      risk_trees = assign_regime_probabilities(trees, config.get_double("p_min", 0.0),
                                               config.get_double("p_max", 1.0), p_seed);
    }
  }
  for (std::size_t r = 0; r < risk_trees.size(); ++r) spec.regimes.push_back({risk_trees[r], durations[r]});

  const auto& leaves = trees.front().leaves();
  if (config.has("sigma")) {
    spec.sigma = dependence::load_correlation_csv(config.resolve(*config.get("sigma")));
  } else {
    const double rho = config.get_double("sigma_constant", 0.0);
    spec.sigma.assets = leaves;
    const auto n = static_cast<Eigen::Index>(leaves.size());
    spec.sigma.values = Matrix::Constant(n, n, rho);
    spec.sigma.values.diagonal().setOnes();
  }
  spec.sigma.scheme = "model";
  if (config.has("length") && static_cast<std::size_t>(config.get_int("length", 0)) != spec.length()) {
    throw LocatedError("length", "does not equal the sum of regime durations (" + std::to_string(spec.length()) + ")");
  }
  spec.validate();
  return spec;
}

void write_simulation(const std::filesystem::path& dir, const DhmSpec& spec, const SimulationOutput& out,
                      const io::Json& config_record) {
  std::filesystem::create_directories(dir);
  io::Json provenance;
  provenance["source"] = "dhm simulation";
  provenance["seed"] = spec.seed;
  provenance["config"] = config_record;
  market::write_returns_csv(dir / "returns.csv", out.returns, provenance);

  for (std::size_t r = 0; r < out.activations.size(); ++r) {
    const auto& acts = out.activations[r];
    const auto& tree = spec.regimes[r].tree.tree();
    std::string text = "t";
    for (const auto& node : tree.nodes()) text += ",a" + std::to_string(node.id);
    text += "\n";
    for (std::size_t t = 0; t < acts.length(); ++t) {
      text += std::to_string(t);
      for (std::size_t m = 0; m < acts.nodes(); ++m) text += acts.at(t, m) ? ",1" : ",0";
      text += "\n";
    }
    const auto path = dir / ("activations_r" + std::to_string(r) + ".csv");
    io::write_text_atomic(path, text);
    io::write_sidecar(path, {{"regime", r}, {"duration", acts.length()}});
  }

  std::string vol = "t,xi,x\n";
  for (std::size_t t = 0; t < out.x.size(); ++t) {
    vol += std::to_string(t) + "," + format_double(out.xi[t]) + "," + format_double(out.x[t]) + "\n";
  }
  io::write_text_atomic(dir / "volatility.csv", vol);

  io::Json params;
  params["seed"] = spec.seed;
  params["length"] = spec.length();
  params["lambda"] = spec.logvol.lambda;
  params["horizon"] = spec.logvol.horizon;
  params["assets"] = spec.sigma.assets;
  params["sigma_clipped_mass"] = out.sigma_clipped_mass;
  params["xi_clipped_fraction"] = out.xi_clipped_fraction;
  params["xi_max_cov_deviation"] = out.xi_max_cov_deviation;
  params["regimes"] = io::Json::array();
  for (const auto& regime : spec.regimes) {
    params["regimes"].push_back({{"duration", regime.duration},
                                 {"tree", hierarchy::dendrogram_to_json(regime.tree.tree())}});
  }
  io::write_json(dir / "params.json", params);
}

}  // namespace hiermf::dhm
