// ddet: build sensor networks, run consensus-based detection experiments and
// emit the CSV artifacts (CROC curves, deflection sweeps, consensus traces,
// energy reports). Every subcommand is deterministic given its config.
//
// Exit codes: 0 ok, 1 config/argument error, 2 I/O error, 3 numeric error.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddet/asymptotics.hpp"
#include "ddet/config.hpp"
#include "ddet/consensus.hpp"
#include "ddet/detectors.hpp"
#include "ddet/errors.hpp"
#include "ddet/experiments.hpp"
#include "ddet/model.hpp"
#include "ddet/network.hpp"
#include "ddet/textio.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ddet::IoError("cannot open output file '" + path + "'");
  return out;
}

void cmd_gen_network(int n, int edges, double side, std::uint64_t seed,
                     const std::string& out_path) {
  const ddet::SensorNetwork network =
      ddet::generate_geometric_network(n, edges, side, seed);
  auto out = open_output(out_path);
  ddet::write_network(out, network);
  std::cout << "wrote " << out_path << " (factor="
            << ddet::format_double(ddet::spectral_convergence_factor(network.weights))
            << ")\n";
}

void cmd_croc(const std::string& config_path, int threads,
              const std::string& out_dir_override) {
  const ddet::ExperimentConfig config = ddet::ExperimentConfig::parse_file(config_path);
  ddet::CrocOptions options;
  options.model = config.build_model();
  options.network = config.build_network();
  options.n_slots = config.n_slots;
  options.n_it = config.n_it;
  options.n_trials = config.n_trials;
  options.base_seed = config.base_seed;
  options.gamma_grid_size = config.gamma_grid_size;
  options.threads = threads;
  options.rho = config.rho;
  const ddet::CrocResult result = ddet::run_croc_experiment(options);
  const std::string dir = out_dir_override.empty() ? config.out_dir : out_dir_override;
  for (const ddet::CrocTable& table : result.tables) {
    const std::string mc_path =
        (fs::path(dir) /
         ddet::output_file_name("croc", ddet::to_string(table.kind), table.base_seed))
            .string();
    const std::string theory_path =
        (fs::path(dir) / ddet::output_file_name("croc_theory", ddet::to_string(table.kind),
                                                table.base_seed))
            .string();
    {
      auto out = open_output(mc_path);
      ddet::write_croc_csv(out, table);
    }
    {
      auto out = open_output(theory_path);
      ddet::write_croc_theory_csv(out, table);
    }
    std::cout << "wrote " << mc_path << '\n' << "wrote " << theory_path << '\n';
  }
}

void cmd_asymptotic_croc(const std::string& config_path, const std::string& kind_name,
                         int gamma_count, const std::string& out_override) {
  const ddet::ExperimentConfig config = ddet::ExperimentConfig::parse_file(config_path);
  const ddet::GaussianMeanModel model = config.build_model();
  const bool lmp = kind_name == "lmp";
  if (!lmp && kind_name != "glr")
    throw ddet::ConfigError("asymptotic-croc: --kind must be glr or lmp");
  const ddet::AsymptoticSpec spec = lmp
                                        ? ddet::lmp_asymptotic_spec(model, config.n_slots)
                                        : ddet::glr_asymptotic_spec(model, config.n_slots);
  // Auto grid: spans both laws out to four standard deviations.
  const double lo = 1e-9;
  const double hi = std::max(
      spec.dist_h0.mean() + 4.0 * std::sqrt(spec.dist_h0.variance()),
      spec.dist_h1.mean() + 4.0 * std::sqrt(spec.dist_h1.variance()));
  std::vector<double> gammas(gamma_count);
  for (int i = 0; i < gamma_count; ++i)
    gammas[i] = lo + (hi - lo) * i / (gamma_count - 1);
  const auto curve = ddet::croc_theoretical(spec, gammas);
  const std::string path =
      out_override.empty()
          ? (fs::path(config.out_dir) /
             ddet::output_file_name("asymptotic_croc", ddet::to_string(spec.kind),
                                    config.base_seed))
                .string()
          : out_override;
  auto out = open_output(path);
  out << "# experiment=asymptotic_croc\n";
  out << "# statistic=" << ddet::to_string(spec.kind) << '\n';
  out << "# L=" << config.n_slots << '\n';
  out << "# seed=" << config.base_seed << '\n';
  out << "gamma,pfa_theory,pmd_theory\n";
  for (std::size_t i = 0; i < gammas.size(); ++i)
    out << ddet::format_double(gammas[i]) << ',' << ddet::format_double(curve[i].first)
        << ',' << ddet::format_double(curve[i].second) << '\n';
  std::cout << "wrote " << path << '\n';
}

void cmd_deflection(const std::string& config_path, const std::string& rhos_arg,
                    const std::string& phis_arg, double norm_theta1, int n_slots,
                    const std::string& out_override) {
  ddet::DeflectionConfig config;
  if (!config_path.empty()) {
    config = ddet::DeflectionConfig::parse_file(config_path);
  } else {
    if (rhos_arg.empty())
      throw ddet::ConfigError("deflection: give --config or --rhos");
    std::stringstream stream(rhos_arg);
    std::string item;
    while (std::getline(stream, item, ',')) config.rhos.push_back(std::stod(item));
    config.phis_degrees = ddet::parse_grid_spec(phis_arg);
    config.norm_theta1 = norm_theta1;
    config.n_slots = n_slots;
  }
  const ddet::DeflectionTable table = ddet::deflection_sweep(
      config.rhos, config.phis_degrees, config.norm_theta1, config.n_slots);
  const std::string path =
      out_override.empty()
          ? (fs::path(config.out_dir) /
             ddet::output_file_name("deflection", "ratio", config.seed))
                .string()
          : out_override;
  auto out = open_output(path);
  ddet::write_deflection_csv(out, table, config.seed);
  std::cout << "wrote " << path << '\n';
}

void cmd_consensus_trace(const std::string& network_path, int n, int edges, double side,
                         std::uint64_t net_seed, int n_it, std::uint64_t init_seed,
                         const std::string& out_path) {
  ddet::SensorNetwork network;
  if (!network_path.empty()) {
    std::ifstream in(network_path);
    if (!in) throw ddet::IoError("cannot open network file '" + network_path + "'");
    network = ddet::read_network(in);
  } else {
    network = ddet::generate_geometric_network(n, edges, side, net_seed);
  }
  ddet::Pcg32 rng(init_seed);
  Eigen::VectorXd values(network.n());
  for (int k = 0; k < network.n(); ++k) values[k] = rng.next_normal();
  const double target = values.mean();

  auto out = open_output(out_path);
  out << "# experiment=consensus_trace\n";
  out << "# n_it=" << n_it << '\n';
  out << "# seed=" << init_seed << '\n';
  out << "# network_hash=" << ddet::format_hex64(ddet::network_hash(network)) << '\n';
  out << "t";
  for (int k = 0; k < network.n(); ++k) out << ",node_" << k;
  out << ",consensus_error_l2\n";
  ddet::TransmissionLedger ledger;
  Eigen::VectorXd state = values;
  for (int t = 0; t <= n_it; ++t) {
    if (t > 0) state = ddet::consensus_iterate(network.weights, state, ledger);
    out << t;
    for (int k = 0; k < network.n(); ++k) out << ',' << ddet::format_double(state[k]);
    const double err = (state.array() - target).matrix().norm();
    out << ',' << ddet::format_double(err) << '\n';
  }
  std::cout << "wrote " << out_path << '\n';
}

void cmd_energy(int n, int n_it, const std::string& kind_name,
                const std::string& out_path) {
  ddet::StatisticKind kind = ddet::StatisticKind::LmpKnownCov;
  if (kind_name == "glr")
    kind = ddet::StatisticKind::GlrKnownCov;
  else if (kind_name != "lmp")
    throw ddet::ConfigError("energy: --kind must be glr or lmp");
  const ddet::EnergyReport report = ddet::energy_report(n, n_it, kind);
  if (out_path.empty()) {
    ddet::write_energy_report(std::cout, report);
  } else {
    auto out = open_output(out_path);
    ddet::write_energy_report(out, report);
    std::cout << "wrote " << out_path << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed detection simulator for correlated sensor networks"};
  app.require_subcommand(1);

  // gen-network
  auto* gen = app.add_subcommand("gen-network", "generate a geometric sensor network");
  int gen_n = 10, gen_edges = 20;
  double gen_side = 100.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "network.txt";
  gen->add_option("--n", gen_n, "number of nodes");
  gen->add_option("--edges", gen_edges, "target edge count");
  gen->add_option("--side", gen_side, "square side length (m)");
  gen->add_option("--seed", gen_seed, "position seed");
  gen->add_option("--out", gen_out, "output file");

  // croc
  auto* croc = app.add_subcommand("croc", "Monte Carlo + theoretical CROC tables");
  std::string croc_config;
  std::string croc_out_dir;
  int croc_threads = 0;
  croc->add_option("--config", croc_config, "experiment config file")->required();
  croc->add_option("--threads", croc_threads, "worker threads (0 = all cores)");
  croc->add_option("--out-dir", croc_out_dir, "override output.dir");

  // asymptotic-croc
  auto* acroc = app.add_subcommand("asymptotic-croc", "theoretical CROC curve only");
  std::string acroc_config, acroc_kind = "lmp", acroc_out;
  int acroc_count = 201;
  acroc->add_option("--config", acroc_config, "experiment config file")->required();
  acroc->add_option("--kind", acroc_kind, "glr or lmp");
  acroc->add_option("--gamma-count", acroc_count, "grid size");
  acroc->add_option("--out", acroc_out, "output file");

  // deflection
  auto* defl = app.add_subcommand("deflection", "two-sensor deflection-ratio sweep");
  std::string defl_config, defl_rhos, defl_phis = "0:360:1", defl_out;
  double defl_norm = 1.0;
  int defl_slots = 1;
  defl->add_option("--config", defl_config, "deflection config file");
  defl->add_option("--rhos", defl_rhos, "comma list of correlation values");
  defl->add_option("--phis", defl_phis, "phi grid start:stop:step (degrees)");
  defl->add_option("--norm", defl_norm, "norm of theta1");
  defl->add_option("--L", defl_slots, "slots per sensor");
  defl->add_option("--out", defl_out, "output file");

  // consensus-trace
  auto* trace = app.add_subcommand("consensus-trace", "per-iteration consensus values");
  std::string trace_network, trace_out = "consensus_trace.csv";
  int trace_n = 10, trace_edges = 20, trace_nit = 20;
  double trace_side = 100.0;
  std::uint64_t trace_net_seed = 0, trace_init_seed = 1;
  trace->add_option("--network", trace_network, "network file (else generate)");
  trace->add_option("--n", trace_n, "nodes (when generating)");
  trace->add_option("--edges", trace_edges, "edges (when generating)");
  trace->add_option("--side", trace_side, "side (when generating)");
  trace->add_option("--net-seed", trace_net_seed, "network seed (when generating)");
  trace->add_option("--n-it", trace_nit, "iterations");
  trace->add_option("--init-seed", trace_init_seed, "initial-vector seed");
  trace->add_option("--out", trace_out, "output file");

  // energy
  auto* energy = app.add_subcommand("energy", "transmission-count report");
  int energy_n = 10, energy_nit = 20;
  std::string energy_kind = "lmp", energy_out;
  energy->add_option("--n", energy_n, "nodes");
  energy->add_option("--n-it", energy_nit, "consensus iterations");
  energy->add_option("--kind", energy_kind, "glr or lmp");
  energy->add_option("--out", energy_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) cmd_gen_network(gen_n, gen_edges, gen_side, gen_seed, gen_out);
    if (croc->parsed()) cmd_croc(croc_config, croc_threads, croc_out_dir);
    if (acroc->parsed()) cmd_asymptotic_croc(acroc_config, acroc_kind, acroc_count, acroc_out);
    if (defl->parsed())
      cmd_deflection(defl_config, defl_rhos, defl_phis, defl_norm, defl_slots, defl_out);
    if (trace->parsed())
      cmd_consensus_trace(trace_network, trace_n, trace_edges, trace_side, trace_net_seed,
                          trace_nit, trace_init_seed, trace_out);
    if (energy->parsed()) cmd_energy(energy_n, energy_nit, energy_kind, energy_out);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error kind=config message=\"" << e.what() << "\"\n";
    return 1;
  } catch (const ddet::ConfigError& e) {
    std::cerr << "error kind=config message=\"" << e.what() << "\"\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error kind=config message=\"" << e.what() << "\"\n";
    return 1;
  } catch (const ddet::IoError& e) {
    std::cerr << "error kind=io message=\"" << e.what() << "\"\n";
    return 2;
  } catch (const ddet::NumericError& e) {
    std::cerr << "error kind=numeric message=\"" << e.what() << "\"\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal message=\"" << e.what() << "\"\n";
    return 3;
  }
  return 0;
}
