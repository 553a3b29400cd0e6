/*
 * Copyright 2026 The ejlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// ejlab command-line driver: topology dumps, fault sets, routing, training,
// reachability and throughput sweeps, plots, and the full reproduction pipeline.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ejlab/ejlab.hpp"

namespace fs = std::filesystem;
using namespace ejlab;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string config;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--out-dir", c.out_dir, "directory for output files");
  cmd->add_option("--config", c.config, "experiment config (JSON)");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = c.seed;
  return cfg;
}

fs::path out_path(const Common& c, const std::string& name) {
  const fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  fs::create_directories(dir);
  return dir / name;
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

Topology topology_of(const ExperimentConfig& cfg) { return build_topology(cfg.alpha); }

std::shared_ptr<const rl::PolicyParams> load_policy_file(const std::string& path) {
  if (path.empty()) throw ConfigError("the rl engine needs a policy file (--policy or engine.policy)");
  return std::make_shared<const rl::PolicyParams>(rl::load_policy(path));
}

Engine make_engine(EngineKind kind, const ExperimentConfig& cfg, std::shared_ptr<const rl::PolicyParams> policy) {
  switch (kind) {
    case EngineKind::greedy: return Engine::greedy(cfg.greedy_metric);
    case EngineKind::dijkstra: return Engine::dijkstra();
    case EngineKind::rl: return Engine::rl(policy ? std::move(policy) : load_policy_file(cfg.policy));
  }
  throw ConfigError("unknown engine");
}

FaultSet faults_from_file(const Topology& topo, const std::string& path) {
  if (path.empty()) return FaultSet::none(topo.order());
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fault file " + path);
  return read_faults(in, topo);
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// --- subcommands ------------------------------------------------------------

void cmd_topo(const Common& common, std::optional<std::int64_t> a, std::optional<std::int64_t> b) {
  auto cfg = resolve(common);
  if (a) cfg.alpha.a = *a;
  if (b) cfg.alpha.b = *b;
  const auto topo = topology_of(cfg);
  std::cout << "n=" << topo.order() << " diameter=" << topo.diameter() << '\n'
            << join(distance_distribution(topo, 0)) << '\n';
  if (!common.out_dir.empty()) {
    auto os = open_out(out_path(common, "topology.txt"));
    write_topology(os, topo);
  }
}

struct FaultArgs {
  std::optional<std::int64_t> a, b;
  std::optional<std::string> model;
  std::optional<int> count;
  std::optional<double> density;
  int sector = 0;
};

void cmd_faults(const Common& common, const FaultArgs& args) {
  auto cfg = resolve(common);
  if (args.a) cfg.alpha.a = *args.a;
  if (args.b) cfg.alpha.b = *args.b;
  const auto topo = topology_of(cfg);
  FaultSpec spec;
  spec.model = args.model ? parse_fault_model(*args.model) : cfg.fault_model;
  if (args.count) spec.count = *args.count;
  else if (args.density) spec.density = *args.density;
  else spec.count = cfg.fault_counts.back();
  spec.sector_index = args.sector;
  spec.seed = cfg.require_seed();
  const auto faults = inject_faults(topo, spec);
  if (common.out_dir.empty()) {
    write_faults(std::cout, faults);
  } else {
    auto os = open_out(out_path(common, "faults.txt"));
    write_faults(os, faults);
  }
}

struct RouteArgs {
  std::optional<std::int64_t> a, b;
  std::optional<std::string> engine;
  std::optional<std::string> policy;
  std::string faults;
  std::optional<int> src, dst;
  bool all = false;
};

void cmd_route(const Common& common, const RouteArgs& args) {
  auto cfg = resolve(common);
  if (args.a) cfg.alpha.a = *args.a;
  if (args.b) cfg.alpha.b = *args.b;
  if (args.policy) cfg.policy = *args.policy;
  const auto topo = topology_of(cfg);
  const auto faults = faults_from_file(topo, args.faults);
  const auto engine = make_engine(args.engine ? parse_engine(*args.engine) : EngineKind::dijkstra, cfg, nullptr);

  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (args.all) {
    for (NodeId s : faults.live_nodes()) {
      for (NodeId d : faults.live_nodes()) {
        if (s != d) pairs.emplace_back(s, d);
      }
    }
  } else {
    if (!args.src || !args.dst) throw ConfigError("route needs --src and --dst, or --all");
    if (!topo.valid(*args.src) || !topo.valid(*args.dst)) throw ConfigError("node id out of range");
    pairs.emplace_back(*args.src, *args.dst);
  }
  std::ostringstream out;
  for (const auto& [s, d] : pairs) {
    const auto r = engine.route(topo, faults, make_request(topo, s, d));
    out << s << ' ' << d << ' ' << engine.name() << ' ' << to_string(r.status) << ' ' << r.hops();
    for (NodeId u : r.path) out << ' ' << u;
    out << '\n';
  }
  if (common.out_dir.empty()) {
    std::cout << out.str();
  } else {
    auto os = open_out(out_path(common, "routes.txt"));
    os << out.str();
  }
}

rl::TrainingResult train_and_save(const Common& common, const ExperimentConfig& cfg, const std::string& hash) {
  auto result = rl::train_curriculum(cfg.train_config());
  {
    auto os = open_out(out_path(common, "policy.bin"), true);
    rl::write_policy(os, result.policy);
  }
  auto log = open_out(out_path(common, "training_log.csv"));
  rl::write_training_log(log, result.log, hash);
  return result;
}

void cmd_train(const Common& common, std::optional<int> episodes) {
  auto cfg = resolve(common);
  if (episodes) cfg.training.episodes_per_density = *episodes;
  cfg.training.validate();
  cfg.require_seed();
  const auto hash = manifest_hash(cfg);
  const auto result = train_and_save(common, cfg, hash);
  std::cerr << "trained " << result.updates << " updates, " << result.log.size() << " episodes; manifest " << hash
            << '\n';
}

struct SweepArgs {
  std::vector<std::string> engines;
  std::optional<std::string> policy;
  std::optional<std::string> model;
  std::vector<int> counts;
  std::optional<int> trials, pairs;
  std::vector<double> loads;
  std::optional<int> cycles, seeds;
  std::string faults;
};

void apply_sweep_args(ExperimentConfig& cfg, const SweepArgs& args) {
  if (!args.engines.empty()) {
    cfg.engines.clear();
    for (const auto& e : args.engines) cfg.engines.push_back(parse_engine(e));
  }
  if (args.policy) cfg.policy = *args.policy;
  if (args.model) cfg.fault_model = parse_fault_model(*args.model);
  if (!args.counts.empty()) cfg.fault_counts = args.counts;
  if (args.trials) cfg.trials = *args.trials;
  if (args.pairs) cfg.pairs = *args.pairs;
  if (!args.loads.empty()) cfg.traffic.loads = args.loads;
  if (args.cycles) cfg.traffic.cycles = *args.cycles;
  if (args.seeds) cfg.traffic.seeds = *args.seeds;
  cfg.sweep_params().validate();
  cfg.traffic.validate();
}

void write_eval(const Common& common, const ExperimentConfig& cfg, const std::string& hash,
                std::shared_ptr<const rl::PolicyParams> policy) {
  const auto topo = topology_of(cfg);
  const auto sweep = cfg.reachability();
  auto os = open_out(out_path(common, "reachability.csv"));
  bool header = true;
  for (auto kind : cfg.engines) {
    const auto engine = make_engine(kind, cfg, policy);
    const auto reports = run_reachability_sweep(topo, engine, sweep);
    write_reachability_csv(os, engine.name(), cfg.alpha, cfg.fault_model, reports, hash, header);
    header = false;
  }
}

void write_throughput(const Common& common, const ExperimentConfig& cfg, const std::string& hash,
                      const std::string& fault_file, std::shared_ptr<const rl::PolicyParams> policy) {
  const auto topo = topology_of(cfg);
  const auto faults = fault_file.empty() ? inject_faults(topo, cfg.traffic_faults()) : faults_from_file(topo, fault_file);
  const auto traffic = cfg.traffic_config();
  auto os = open_out(out_path(common, "throughput.csv"));
  bool header = true;
  for (auto kind : cfg.engines) {
    const auto engine = make_engine(kind, cfg, policy);
    const auto points = run_throughput_sweep(topo, engine, faults, traffic);
    write_throughput_csv(os, engine.name(), cfg.alpha, faults, points, hash, header);
    header = false;
  }
}

void write_plots(const Common& common, const fs::path& csv, const std::string& fallback_hash) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open " + csv.string());
  const auto table = read_csv(in);
  for (const auto& [stem, chart] : charts_for(table, fallback_hash)) {
    auto os = open_out(out_path(common, stem + ".svg"));
    os << render_svg(chart);
  }
}

void cmd_eval(const Common& common, const SweepArgs& args) {
  auto cfg = resolve(common);
  apply_sweep_args(cfg, args);
  cfg.require_seed();
  write_eval(common, cfg, manifest_hash(cfg), nullptr);
}

void cmd_throughput(const Common& common, const SweepArgs& args) {
  auto cfg = resolve(common);
  apply_sweep_args(cfg, args);
  cfg.require_seed();
  write_throughput(common, cfg, manifest_hash(cfg), args.faults, nullptr);
}

void cmd_plot(const Common& common, const std::string& input) {
  const auto cfg = resolve(common);
  write_plots(common, input, common.config.empty() ? std::string() : manifest_hash(cfg));
}

/// Whole pipeline from one manifest: resolved config, policy (trained unless the
/// config names one), reachability and throughput CSVs, and their plots.
void cmd_repro(const Common& common) {
  const auto cfg = resolve(common);
  cfg.require_seed();
  const auto hash = manifest_hash(cfg);
  {
    auto os = open_out(out_path(common, "manifest.json"));
    os << canonical_config(cfg);
  }
  std::shared_ptr<const rl::PolicyParams> policy;
  const bool wants_rl = std::find(cfg.engines.begin(), cfg.engines.end(), EngineKind::rl) != cfg.engines.end();
  if (wants_rl) {
    if (cfg.policy.empty()) {
      policy = std::make_shared<const rl::PolicyParams>(train_and_save(common, cfg, hash).policy);
    } else {
      policy = load_policy_file(cfg.policy);
    }
  }
  write_eval(common, cfg, hash, policy);
  write_throughput(common, cfg, hash, {}, policy);
  write_plots(common, out_path(common, "reachability.csv"), hash);
  write_plots(common, out_path(common, "throughput.csv"), hash);
  std::cerr << "repro complete; manifest " << hash << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ejlab: routing experiments on Eisenstein-Jacobi networks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;

  std::optional<std::int64_t> topo_a, topo_b;
  auto* topo = app.add_subcommand("topo", "build a topology; print order, diameter and distance distribution");
  add_common(topo, common);
  topo->add_option("--a", topo_a, "alpha real part");
  topo->add_option("--b", topo_b, "alpha rho part");

  FaultArgs fault_args;
  auto* faults = app.add_subcommand("faults", "generate a fault set");
  add_common(faults, common);
  faults->add_option("--a", fault_args.a);
  faults->add_option("--b", fault_args.b);
  faults->add_option("--model", fault_args.model, "uniform | clustered | sector");
  faults->add_option("--count", fault_args.count);
  faults->add_option("--density", fault_args.density);
  faults->add_option("--sector", fault_args.sector, "sector index for the sector model");

  RouteArgs route_args;
  auto* route = app.add_subcommand("route", "route one pair or all pairs");
  add_common(route, common);
  route->add_option("--a", route_args.a);
  route->add_option("--b", route_args.b);
  route->add_option("--engine", route_args.engine, "greedy | dijkstra | rl");
  route->add_option("--policy", route_args.policy, "policy file for the rl engine");
  route->add_option("--faults", route_args.faults, "fault file");
  route->add_option("--src", route_args.src);
  route->add_option("--dst", route_args.dst);
  route->add_flag("--all", route_args.all, "route every ordered live pair");

  std::optional<int> episodes;
  auto* train = app.add_subcommand("train", "behaviour cloning + curriculum PPO; writes policy.bin and training_log.csv");
  add_common(train, common);
  train->add_option("--episodes-per-density", episodes);

  SweepArgs sweep_args;
  auto* eval = app.add_subcommand("eval", "reachability sweep; writes reachability.csv");
  add_common(eval, common);
  eval->add_option("--engine", sweep_args.engines, "engines to evaluate")->delimiter(',');
  eval->add_option("--policy", sweep_args.policy);
  eval->add_option("--model", sweep_args.model);
  eval->add_option("--faults", sweep_args.counts, "fault counts")->delimiter(',');
  eval->add_option("--trials", sweep_args.trials);
  eval->add_option("--pairs", sweep_args.pairs);

  auto* throughput = app.add_subcommand("throughput", "load sweep; writes throughput.csv");
  add_common(throughput, common);
  throughput->add_option("--engine", sweep_args.engines)->delimiter(',');
  throughput->add_option("--policy", sweep_args.policy);
  throughput->add_option("--faults", sweep_args.faults, "fault file (default: generated from the config)");
  throughput->add_option("--loads", sweep_args.loads)->delimiter(',');
  throughput->add_option("--cycles", sweep_args.cycles);
  throughput->add_option("--seeds", sweep_args.seeds);

  std::string plot_input;
  auto* plot = app.add_subcommand("plot", "render SVG charts from a reachability or throughput CSV");
  add_common(plot, common);
  plot->add_option("--input", plot_input, "CSV file")->required();

  auto* repro = app.add_subcommand("repro", "run the full reproduction pipeline from one config");
  add_common(repro, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*topo) cmd_topo(common, topo_a, topo_b);
    else if (*faults) cmd_faults(common, fault_args);
    else if (*route) cmd_route(common, route_args);
    else if (*train) cmd_train(common, episodes);
    else if (*eval) cmd_eval(common, sweep_args);
    else if (*throughput) cmd_throughput(common, sweep_args);
    else if (*plot) cmd_plot(common, plot_input);
    else if (*repro) cmd_repro(common);
  } catch (const ConfigError& e) {
    std::cerr << "ejlab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ejlab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
