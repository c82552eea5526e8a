#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hiermf/dendrogram.hpp"
#include "hiermf/dependence.hpp"
#include "hiermf/diagnostics.hpp"
#include "hiermf/hierarchy.hpp"
#include "hiermf/kv_config.hpp"
#include "hiermf/market_data.hpp"
#include "hiermf/scaling.hpp"

namespace hiermf::cli {

// Stable exit-status contract.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;       // bad flags, unreadable or invalid config/input
inline constexpr int exit_validation = 2;  // validate-model check outside tolerance

struct GlobalOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;  // overrides `seed` in the config
  unsigned jobs = 1;
  std::filesystem::path out = "hiermf-out";
};

struct AnalyzeOptions {
  std::size_t window = 0;  // trailing rows used for the correlation; 0 = all
  double theta = 0.0;      // 0 = default_theta(window)
  bool exponential = true;
  hierarchy::Linkage linkage = hierarchy::Linkage::average;
  std::optional<hierarchy::Dendrogram> tree;  // imported tree replaces clustering
  double threshold = 0.015;                   // <= 0 disables the Delta H filter
  scaling::GheOptions ghe{};
  unsigned jobs = 1;
};

struct AssetScaling {
  std::string asset;
  double h1 = 0.0;
  double h2 = 0.0;
  double delta_h = 0.0;
  double se_h1 = 0.0;
  double se_h2 = 0.0;
  int order = 0;
  bool kept = false;
};

struct AnalyzeReport {
  dependence::CorrelationMatrix correlation;
  hierarchy::Dendrogram tree;
  std::vector<AssetScaling> assets;  // panel column order
  diagnostics::OrderProfileStats profile;
  std::optional<diagnostics::TrendTest> trend;  // needs three distinct orders
  std::vector<std::string> warnings;
};

// Returns -> weighted correlation -> distance -> dendrogram -> orders, plus GHE
// per asset and the order profile of the assets above the threshold.
AnalyzeReport analyze_panel(const market::ReturnsPanel& panel, const AnalyzeOptions& options);

// Parses the options shared by analyze and rolling from a config.
AnalyzeOptions analyze_options(const KeyValueConfig& config);
// Loads `prices = <csv>` or `returns = <csv>` with date_column / tickers / scale.
market::ReturnsPanel load_panel(const KeyValueConfig& config);

int cmd_analyze(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log);
int cmd_simulate(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log);
int cmd_rolling(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log);
int cmd_validate_model(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log);
int cmd_calibrate(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log);

// Full command-line entry point; errors are reported on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hiermf::cli
