#include "hiermf/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "hiermf/dhm.hpp"
#include "hiermf/experiments.hpp"
#include "hiermf/io.hpp"
#include "hiermf/stats.hpp"

namespace hiermf::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::size_t get_size(const KeyValueConfig& config, const std::string& key, std::size_t fallback) {
  const auto v = config.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw LocatedError(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

// Collects per-stage timings, output files and warnings, then writes the
// manifest as the very last file of a run.
class Run {
 public:
  Run(std::string command, const KeyValueConfig& config, const GlobalOptions& global)
      : command_(std::move(command)), config_(config), global_(global), start_(Clock::now()), stage_start_(start_) {
    fs::create_directories(global.out);
  }

  const fs::path& out() const { return global_.out; }
  Json config_record() const { return {{"command", command_}, {"config", config_.to_text()}}; }

  void stage(const std::string& name) {
    const auto now = Clock::now();
    stages_.push_back({{"name", name}, {"seconds", seconds(stage_start_, now)}});
    stage_start_ = now;
  }
  void output(const fs::path& path) { outputs_.push_back(fs::relative(path, global_.out).generic_string()); }
  void warn(const std::string& message, std::ostream& log) {
    warnings_.push_back(message);
    log << "warning: " << message << "\n";
  }

  void finish(const Json& extra = Json::object()) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(config_.to_text())));
    Json m;
    m["tool"] = "hiermf";
    m["version"] = HIERMF_VERSION;
    m["command"] = command_;
    m["config_hash"] = std::string("fnv1a64:") + hash;
    m["config"] = config_.to_text();
    m["jobs"] = global_.jobs;
    m["wall_seconds"] = seconds(start_, Clock::now());
    m["stages"] = stages_;
    m["outputs"] = outputs_;
    m["warnings"] = warnings_;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    io::write_json(global_.out / "manifest.json", m);
  }

 private:
  using Clock = std::chrono::steady_clock;
  static double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  }

  std::string command_;
  const KeyValueConfig& config_;
  const GlobalOptions& global_;
  Clock::time_point start_;
  Clock::time_point stage_start_;
  Json stages_ = Json::array();
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
};

// Adds the run's config record to a sidecar written by a lower-level writer.
void annotate_sidecar(const fs::path& csv, const Json& record) {
  Json doc = io::read_json(io::sidecar_path(csv));
  doc["run"] = record;
  io::write_sidecar(csv, doc);
}

std::string fmt(double v) { return format_double(v); }

std::uint64_t config_seed(const KeyValueConfig& config) {
  const auto s = config.get("seed");
  if (!s) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(*s, &used);
    if (used != s->size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw LocatedError("seed", "expected an unsigned integer, got '" + *s + "'");
  }
}

}  // namespace

market::ReturnsPanel load_panel(const KeyValueConfig& config) {
  market::CsvSchema schema;
  schema.date_column = config.get_string("date_column", "date");
  if (config.has("tickers")) schema.tickers = split_list(*config.get("tickers"));
  if (config.has("prices")) {
    const auto loaded = market::load_prices_csv(config.resolve(*config.get("prices")), schema);
    return market::align_returns(loaded.series, static_cast<int>(config.get_int("scale", 1)));
  }
  if (config.has("returns")) return market::load_returns_csv(config.resolve(*config.get("returns")), schema);
  throw LocatedError("prices", "one of `prices = <csv>` or `returns = <csv>` is required");
}

AnalyzeOptions analyze_options(const KeyValueConfig& config) {
  AnalyzeOptions o;
  o.window = get_size(config, "window", 0);
  o.theta = config.get_double("theta", 0.0);
  const auto weighting = config.get_string("weighting", "exponential");
  if (weighting != "exponential" && weighting != "flat") {
    throw LocatedError("weighting", "expected exponential or flat, got '" + weighting + "'");
  }
  o.exponential = weighting == "exponential";
  o.linkage = hierarchy::parse_linkage(config.get_string("linkage", "average"));
  if (config.has("tree")) o.tree = hierarchy::parse_dendrogram(config.resolve(*config.get("tree")));
  o.threshold = config.get_double("threshold", 0.015);
  o.ghe.lmax_min = static_cast<int>(config.get_int("lmax_min", 5));
  o.ghe.lmax_max = static_cast<int>(config.get_int("lmax_max", 19));
  return o;
}

AnalyzeReport analyze_panel(const market::ReturnsPanel& panel, const AnalyzeOptions& options) {
  panel.validate();
  const std::size_t n = panel.cols();
  if (n < 2) throw Error("analyze: need at least two assets");
  const std::size_t window = options.window == 0 ? panel.rows() : options.window;
  if (window > panel.rows()) {
    throw LocatedError("window", std::to_string(window) + " exceeds the " + std::to_string(panel.rows()) +
                                     " available rows");
  }
  AnalyzeReport report;

  const auto recent = panel.slice(panel.rows() - window, window);
  const auto scheme = options.exponential
                          ? dependence::exp_weights(window, options.theta > 0 ? options.theta
                                                                              : dependence::default_theta(window))
                          : dependence::flat_weights(window);
  report.correlation = dependence::weighted_pearson_matrix(recent, scheme);

  if (options.tree) {
    const std::set<std::string> want(panel.assets.begin(), panel.assets.end());
    const std::set<std::string> have(options.tree->leaves().begin(), options.tree->leaves().end());
    if (want != have) throw LocatedError("tree", "leaf labels do not match the panel's assets");
    report.tree = *options.tree;
  } else {
    report.tree = hierarchy::linkage_cluster(dependence::corr_to_distance(report.correlation), panel.assets,
                                             options.linkage);
  }
  const auto orders = hierarchy::order_profile(report.tree);

  report.assets.resize(n);
  parallel_for(n, options.jobs, [&](std::size_t c) {
    const auto est = scaling::estimate_ghe(market::column_log_price(panel, c), options.ghe);
    auto& a = report.assets[c];
    a.asset = panel.assets[c];
    a.h1 = est.h(1.0);
    a.h2 = est.h(2.0);
    a.delta_h = a.h1 - a.h2;
    a.se_h1 = est.std_errors[0];
    a.se_h2 = est.std_errors[1];
  });

  std::map<std::string, double> kept_dh;
  std::map<std::string, int> kept_order;
  for (auto& a : report.assets) {
    a.order = orders.at(a.asset);
    a.kept = options.threshold <= 0.0 || a.delta_h > options.threshold;
    if (a.kept) {
      kept_dh[a.asset] = a.delta_h;
      kept_order[a.asset] = a.order;
    }
  }
  if (kept_dh.size() < 3) {
    throw Error("analyze: fewer than 3 assets survive the Delta H threshold " + fmt(options.threshold) + " (" +
                std::to_string(kept_dh.size()) + " of " + std::to_string(n) + ")");
  }
  report.profile = diagnostics::order_conditional_mean(kept_dh, kept_order);
  if (report.profile.orders.size() >= 3) {
    std::vector<double> xs, ys;
    for (const auto& o : report.profile.orders) {
      xs.push_back(o.order);
      ys.push_back(o.mean);
    }
    report.trend = diagnostics::trend_test(xs, ys);
  } else {
    report.warnings.push_back("fewer than 3 distinct orders; no trend test");
  }
  return report;
}

int cmd_analyze(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log) {
  Run run("analyze", config, global);
  auto options = analyze_options(config);
  options.jobs = global.jobs;
  const auto panel = load_panel(config);
  run.stage("load");
  const auto report = analyze_panel(panel, options);
  run.stage("analyze");
  for (const auto& w : report.warnings) run.warn(w, log);
  const Json record = run.config_record();

  const auto corr_path = run.out() / "correlation.csv";
  dependence::write_correlation_csv(corr_path, report.correlation);
  annotate_sidecar(corr_path, record);
  run.output(corr_path);

  hierarchy::serialize_dendrogram(report.tree, run.out() / "dendrogram.json");
  run.output(run.out() / "dendrogram.json");

  std::string orders = "asset,n\n";
  std::string assets = "asset,H1,H2,dH12,se_H1,se_H2,n,kept\n";
  for (const auto& a : report.assets) {
    orders += a.asset + "," + std::to_string(a.order) + "\n";
    assets += a.asset + "," + fmt(a.h1) + "," + fmt(a.h2) + "," + fmt(a.delta_h) + "," + fmt(a.se_h1) + "," +
              fmt(a.se_h2) + "," + std::to_string(a.order) + "," + (a.kept ? "1" : "0") + "\n";
  }
  const Json scaling_record = {{"run", record},
                               {"threshold", options.threshold},
                               {"lmax", {options.ghe.lmax_min, options.ghe.lmax_max}}};
  for (const auto& [name, text] : {std::pair{"orders.csv", &orders}, std::pair{"assets.csv", &assets}}) {
    io::write_text_atomic(run.out() / name, *text);
    io::write_sidecar(run.out() / name, scaling_record);
    run.output(run.out() / name);
  }
  io::write_text_atomic(run.out() / "order_profile.csv", diagnostics::to_csv(report.profile));
  io::write_sidecar(run.out() / "order_profile.csv", scaling_record);
  run.output(run.out() / "order_profile.csv");

  Json trend = report.trend ? diagnostics::to_json(*report.trend) : Json(nullptr);
  io::write_json(run.out() / "trend.json", {{"trend", trend}, {"run", record}});
  run.output(run.out() / "trend.json");

  if (const auto resamples = get_size(config, "bootstrap", 0); resamples > 0) {
    hierarchy::BootstrapOptions b;
    b.resamples = resamples;
    b.seed = config_seed(config);
    b.method = options.linkage;
    b.jobs = global.jobs;
    const std::size_t window = options.window == 0 ? panel.rows() : options.window;
    const auto scheme = options.exponential
                            ? dependence::exp_weights(window, options.theta > 0 ? options.theta
                                                                                : dependence::default_theta(window))
                            : dependence::flat_weights(window);
    const auto boot = hierarchy::bootstrap_orders(panel.slice(panel.rows() - window, window), scheme, b);
    std::string text = "asset,n,modal_n,modal_fraction,retained\n";
    const std::set<std::string> retained(boot.retained.begin(), boot.retained.end());
    for (std::size_t i = 0; i < boot.leaves.size(); ++i) {
      text += boot.leaves[i] + "," + std::to_string(boot.point_orders[i]) + "," + std::to_string(boot.modal_orders[i]) +
              "," + fmt(boot.modal_fractions[i]) + "," + (retained.count(boot.leaves[i]) ? "1" : "0") + "\n";
    }
    io::write_text_atomic(run.out() / "bootstrap.csv", text);
    io::write_sidecar(run.out() / "bootstrap.csv",
                      {{"run", record}, {"rule", boot.rule}, {"resamples", boot.resamples}, {"redrawn", boot.redrawn}});
    run.output(run.out() / "bootstrap.csv");
    run.stage("bootstrap");
  }

  log << "analyze: " << report.assets.size() << " assets, " << report.profile.total() << " above threshold";
  if (report.trend) log << ", trend r=" << fmt(report.trend->r) << " p=" << fmt(report.trend->p_value);
  log << "\n";
  run.finish();
  return exit_ok;
}

int cmd_simulate(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log) {
  Run run("simulate", config, global);
  const std::size_t repeat = get_size(config, "repeat", 1);
  if (repeat == 0) throw LocatedError("repeat", "must be at least 1");
  const std::uint64_t seed = config_seed(config);
  const bool own_p_seed = config.has("p_seed");
  const std::uint64_t p_seed = own_p_seed ? static_cast<std::uint64_t>(config.get_int("p_seed", 0)) : 0;

  // Realization k is the base config with its seeds replaced by derived ones,
  // so each run directory is reproducible on its own.
  std::vector<KeyValueConfig> configs(repeat, config);
  for (std::size_t k = 0; k < repeat; ++k) {
    configs[k].set("seed", std::to_string(derive_seed(seed, k) >> 1));
    if (own_p_seed) configs[k].set("p_seed", std::to_string(derive_seed(p_seed, k) >> 1));
  }
  const auto probe = dhm::load_dhm_spec(configs[0]);
  run.stage("config");

  std::vector<std::string> dirs(repeat);
  std::vector<double> clipped(repeat);
  parallel_for(repeat, global.jobs, [&](std::size_t k) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%04zu", k);
    dirs[k] = name;
    const auto spec = k == 0 ? probe : dhm::load_dhm_spec(configs[k]);
    const auto out = dhm::simulate_returns(spec, {false});
    clipped[k] = out.xi_clipped_fraction;
    dhm::write_simulation(run.out() / name, spec, out,
                          {{"command", "simulate"}, {"realization", k}, {"config", configs[k].to_text()}});
  });
  run.stage("simulate");
  for (std::size_t k = 0; k < repeat; ++k) {
    for (const auto& entry : fs::directory_iterator(run.out() / dirs[k])) {
      if (entry.is_regular_file()) run.output(entry.path());
    }
    if (clipped[k] > 0.0) run.warn(dirs[k] + ": clipped " + fmt(clipped[k]) + " of the volatility spectrum", log);
  }
  log << "simulate: " << repeat << " realization(s) of length " << probe.length() << " over "
      << probe.sigma.assets.size() << " assets\n";
  run.finish({{"realizations", repeat}});
  return exit_ok;
}

int cmd_rolling(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log) {
  Run run("rolling", config, global);
  auto options = analyze_options(config);
  options.jobs = global.jobs;
  options.window = 0;  // each window is analyzed whole
  if (!config.has("theta")) options.theta = 250.0;
  const market::WindowSpec spec{get_size(config, "window_length", 752), get_size(config, "window_count", 50)};
  const std::string cut_name = config.get_string("cut", "gap");
  hierarchy::CutCriterion cut = hierarchy::LargestGap{};
  if (cut_name != "gap") {
    try {
      cut = hierarchy::FixedCount{static_cast<std::size_t>(std::stoul(cut_name))};
    } catch (const std::exception&) {
      throw LocatedError("cut", "expected `gap` or a cluster count, got '" + cut_name + "'");
    }
  }
  const auto panel = load_panel(config);
  const auto starts = market::window_starts(panel.rows(), spec);
  run.stage("load");

  std::string text = "window,start,end,start_label,end_label,mean_rho,q025,q25,q75,q975,clusters,mean_dH,mean_n\n";
  const std::vector<double> levels{0.025, 0.25, 0.75, 0.975};
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const auto sub = panel.slice(starts[w], spec.length);
    const auto scheme = options.exponential ? dependence::exp_weights(spec.length, options.theta)
                                            : dependence::flat_weights(spec.length);
    const auto corr = dependence::weighted_pearson_matrix(sub, scheme);
    std::vector<double> rho;
    for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < corr.values.cols(); ++j) rho.push_back(corr.values(i, j));
    }
    std::sort(rho.begin(), rho.end());
    const auto tree = options.tree ? *options.tree
                                   : hierarchy::linkage_cluster(dependence::corr_to_distance(corr), sub.assets,
                                                                options.linkage);
    const auto clusters = hierarchy::cluster_cut(tree, cut).count;
    const auto orders = hierarchy::order_profile(tree);
    std::vector<double> dh(sub.cols());
    parallel_for(sub.cols(), global.jobs, [&](std::size_t c) {
      dh[c] = scaling::delta_h(scaling::estimate_ghe(market::column_log_price(sub, c), options.ghe));
    });
    double mean_n = 0.0;
    for (const auto& [_, o] : orders) mean_n += o;
    mean_n /= static_cast<double>(orders.size());

    text += std::to_string(w) + "," + std::to_string(starts[w]) + "," + std::to_string(starts[w] + spec.length - 1);
    text += "," + (sub.times.empty() ? std::string() : sub.times.front()) + "," +
            (sub.times.empty() ? std::string() : sub.times.back());
    text += "," + fmt(stats::mean(rho));
    for (double q : levels) text += "," + fmt(stats::quantile_sorted(rho, q));
    text += "," + std::to_string(clusters) + "," + fmt(stats::mean(dh)) + "," + fmt(mean_n) + "\n";
  }
  run.stage("windows");
  const auto path = run.out() / "rolling.csv";
  io::write_text_atomic(path, text);
  io::write_sidecar(path, {{"run", run.config_record()},
                           {"window_length", spec.length},
                           {"window_count", spec.count},
                           {"stride", market::window_stride(panel.rows(), spec)},
                           {"theta", options.exponential ? options.theta : INFINITY},
                           {"cut", cut_name},
                           {"quantiles", "linear interpolation (type 7)"}});
  run.output(path);
  log << "rolling: " << starts.size() << " windows of " << spec.length << " rows\n";
  run.finish();
  return exit_ok;
}

int cmd_validate_model(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log) {
  Run run("validate-model", config, global);
  const auto spec = dhm::load_dhm_spec(config);
  const std::uint64_t seed = config_seed(config);
  const auto checks = split_list(config.get_string("checks", "equivalence,median,dispersion"));
  const std::set<std::string> enabled(checks.begin(), checks.end());
  for (const auto& c : enabled) {
    if (c != "equivalence" && c != "median" && c != "dispersion") throw LocatedError("checks", "unknown check '" + c + "'");
  }
  run.stage("config");

  Json report;
  report["run"] = run.config_record();
  report["checks"] = Json::array();
  bool all_passed = true;
  auto record = [&](Json check) {
    const bool ok = check["passed"].get<bool>();
    all_passed = all_passed && ok;
    log << (ok ? "PASS " : "FAIL ") << check["name"].get<std::string>() << ": " << check["summary"].get<std::string>()
        << "\n";
    report["checks"].push_back(std::move(check));
  };

  if (enabled.count("equivalence")) {
    const double tol = config.get_double("tolerance", 0.02);
    dhm::DhmSpec mc = spec;
    const std::size_t mc_length = get_size(config, "mc_length", 1'000'000);
    for (auto& regime : mc.regimes) regime.duration = mc_length;
    mc.seed = derive_seed(seed, 100);
    const auto out = dhm::simulate_returns(mc, {false});
    const auto eq = experiments::compare_with_theory(mc, out, tol);
    double theory_vs_sigma = 0.0;
    for (const auto& regime : mc.regimes) {
      theory_vs_sigma = std::max(
          theory_vs_sigma,
          (dhm::theoretical_correlation(mc.sigma, regime.tree).values - mc.sigma.values).cwiseAbs().maxCoeff());
    }
    Json failures = Json::array();
    for (const auto& f : eq.failures) {
      failures.push_back({{"regime", f.regime}, {"a", f.a}, {"b", f.b}, {"sample", f.sample}, {"theory", f.theory}});
    }
    record({{"name", "equivalence"},
            {"passed", eq.failures.empty()},
            {"summary", "max |sample - theory| = " + fmt(eq.max_deviation) + " over " + std::to_string(eq.entries) +
                            " entries, tolerance " + fmt(tol)},
            {"length", mc_length},
            {"tolerance", tol},
            {"max_deviation", eq.max_deviation},
            {"entries", eq.entries},
            {"max_theory_minus_sigma", theory_vs_sigma},
            {"failures", failures}});
    run.stage("equivalence");
  }

  experiments::Setup setup;
  setup.sigma = spec.sigma;
  setup.logvol = spec.logvol;
  setup.jobs = global.jobs;
  const auto& tree = spec.regimes.front().tree.tree();

  if (enabled.count("median")) {
    setup.length = get_size(config, "median_length", 4026);
    setup.seed = derive_seed(seed, 101);
    const auto runs = get_size(config, "median_runs", 100);
    const auto ms = experiments::median_shift(tree, setup, runs, config.get_double("median_p_min", 0.1),
                                              config.get_double("median_p_max", 0.4));
    record({{"name", "median"},
            {"passed", ms.smaller == runs},
            {"summary", "hierarchical median below all-p=1 median in " + std::to_string(ms.smaller) + "/" +
                            std::to_string(runs) + " paired runs"},
            {"runs", runs},
            {"smaller", ms.smaller},
            {"hierarchical", ms.hierarchical},
            {"flat", ms.flat}});
    run.stage("median");
  }

  if (enabled.count("dispersion")) {
    setup.length = get_size(config, "dispersion_length", 4026);
    setup.seed = derive_seed(seed, 102);
    const double need = config.get_double("dispersion_ratio", 1.5);
    const auto d = experiments::tau_rho_dispersion(tree, setup, get_size(config, "dispersion_seeds", 20),
                                                   config.get_double("dispersion_p_min", 0.4),
                                                   config.get_double("dispersion_p_max", 0.6));
    record({{"name", "dispersion"},
            {"passed", d.ratio >= need},
            {"summary", "RMS distance from tau = 2/pi arcsin rho: " + fmt(d.mean_hierarchical) + " vs " +
                            fmt(d.mean_flat) + " (ratio " + fmt(d.ratio) + ", need " + fmt(need) + ")"},
            {"ratio", d.ratio},
            {"required_ratio", need},
            {"hierarchical", d.hierarchical},
            {"flat", d.flat}});
    run.stage("dispersion");
  }

  report["passed"] = all_passed;
  io::write_json(run.out() / "validation.json", report);
  run.output(run.out() / "validation.json");
  run.finish({{"passed", all_passed}});
  return all_passed ? exit_ok : exit_validation;
}

int cmd_calibrate(const KeyValueConfig& config, const GlobalOptions& global, std::ostream& log) {
  Run run("calibrate", config, global);
  const std::size_t count = get_size(config, "count", 1000);
  scaling::CalibrationOptions options;
  options.level = config.get_double("level", 0.975);
  options.jobs = global.jobs;
  options.allow_low_count = true;
  options.ghe.lmax_min = static_cast<int>(config.get_int("lmax_min", 5));
  options.ghe.lmax_max = static_cast<int>(config.get_int("lmax_max", 19));
  if (count < 100) run.warn("low realization count (" + std::to_string(count) + " < 100)", log);
  const auto cal = scaling::calibrate_threshold(count, config.get_double("hurst_min", 0.1),
                                                config.get_double("hurst_max", 0.9), get_size(config, "length", 4026),
                                                config_seed(config), options);
  run.stage("calibrate");
  Json doc;
  doc["threshold"] = cal.threshold;
  doc["level"] = cal.level;
  doc["rule"] = cal.rule;
  doc["count"] = cal.count;
  doc["hurst_range"] = {cal.hurst_min, cal.hurst_max};
  doc["length"] = cal.length;
  doc["seed"] = cal.seed;
  doc["run"] = run.config_record();
  doc["hursts"] = cal.hursts;
  doc["delta_h"] = cal.delta_h;
  io::write_json(run.out() / "threshold.json", doc);
  run.output(run.out() / "threshold.json");
  log << "calibrate: threshold " << fmt(cal.threshold) << " from " << count << " realizations\n";
  run.finish();
  return exit_ok;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical multifractality toolkit", "hiermf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HIERMF_VERSION);

  GlobalOptions global;
  global.jobs = default_jobs();
  std::string config_path;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path, "key = value configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "overrides the seed in the configuration");
  app.add_option("--jobs", global.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", global.out, "output directory");

  using Command = int (*)(const KeyValueConfig&, const GlobalOptions&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"analyze", "order / Delta H report for a price or returns panel", cmd_analyze},
      {"simulate", "simulate the hierarchical model (repeat = R realizations)", cmd_simulate},
      {"rolling", "per-window correlation, cluster and scaling summary", cmd_rolling},
      {"validate-model", "Monte Carlo checks of the closed-form correlation", cmd_validate_model},
      {"calibrate", "Delta H significance threshold from fBm realizations", cmd_calibrate},
  };
  for (const auto& [name, help, _] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  }

  try {
    KeyValueConfig config;
    if (*config_opt) {
      global.config = config_path;
      config = KeyValueConfig::load(config_path);
    }
    if (*seed_opt) {
      global.seed = seed;
      config.set("seed", std::to_string(seed));
    }
    for (const auto& [name, _, fn] : commands) {
      if (app.got_subcommand(name)) return fn(config, global, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace hiermf::cli
