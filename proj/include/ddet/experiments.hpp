#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddet/asymptotics.hpp"
#include "ddet/consensus.hpp"
#include "ddet/model.hpp"
#include "ddet/network.hpp"
#include "ddet/types.hpp"

namespace ddet {

struct CrocRow {
  double gamma;
  double pfa_mc;
  double pmd_mc;
  double pfa_theory;
  double pmd_theory;
  double stderr_pfa;  // sqrt(p (1-p) / n_trials) at the Monte Carlo estimate
  double stderr_pmd;
};

/// Monte Carlo CROC joined with the asymptotic curve on a shared gamma grid.
struct CrocTable {
  StatisticKind kind = StatisticKind::GlrKnownCov;
  std::vector<CrocRow> rows;
  // metadata
  int n_sensors = 0;
  int n_slots = 0;
  int n_trials = 0;
  int n_it = 0;
  std::optional<double> rho;
  std::uint64_t base_seed = 0;
  std::uint64_t net_hash = 0;
};

struct CrocOptions {
  GaussianMeanModel model;
  SensorNetwork network;
  int n_slots = 20;
  int n_it = 20;
  int n_trials = 10000;
  std::uint64_t base_seed = 0;
  int gamma_grid_size = 201;
  int threads = 1;  // 0 = hardware concurrency
  std::optional<double> rho;  // metadata passthrough
  std::vector<StatisticKind> kinds;  // empty = both statistics of the regime
};

struct CrocResult {
  std::vector<CrocTable> tables;
  TransmissionLedger ledger;  // aggregated over all distributed runs
};

/// For each trial draws one block under H0 and one under H1, evaluates the
/// requested statistics (GLR centralized; marginal-product distributed with
/// n_it consensus rounds, read at node 0), then sweeps thresholds over the
/// pooled empirical quantile grid. Byte-deterministic in (options - threads).
CrocResult run_croc_experiment(const CrocOptions& options);

struct DeflectionRow {
  double rho;
  double phi_degrees;
  double ratio;  // deflection(marginal-product) / deflection(GLR)
};

struct DeflectionTable {
  std::vector<DeflectionRow> rows;
  double norm_theta1 = 1.0;
  int n_slots = 1;
};

/// Two-sensor polar sweep theta1 = r [cos phi, sin phi] over the rho list.
DeflectionTable deflection_sweep(const std::vector<double>& rhos,
                                 const std::vector<double>& phis_degrees,
                                 double norm_theta1, int n_slots);

struct EnergyReport {
  int n = 0;
  int n_it = 0;
  StatisticKind kind = StatisticKind::LmpKnownCov;
  long long lmp_measured_broadcasts = 0;  // from an actual ledger run: N * n_it
  long long glr_modeled_messages = 0;     // c * N^2, flooding the statistic vector
  int glr_cost_constant = 1;
};

/// Marginal-product cost measured through the ledger, GLR cost modeled as
/// c N^2 (the paper-scale flooding bound); c is a documented model constant.
EnergyReport energy_report(int n, int n_it, StatisticKind kind, int glr_cost_constant = 1);

struct EstimatorValidationReport {
  Eigen::MatrixXd empirical;
  Eigen::MatrixXd predicted;
  double max_diag_rel_error = 0.0;
  double max_offdiag_abs_error = 0.0;
};

/// Monte Carlo covariance of the local mean estimates against the asymptotic
/// prediction (1/L) D^{-1} i~ D^{-1}.
EstimatorValidationReport validate_estimator_asymptotics(const GaussianMeanModel& model,
                                                         int n_slots, int n_trials,
                                                         std::uint64_t seed);

// ---- CSV / report serialization (all doubles at 17 significant digits) ----

void write_croc_csv(std::ostream& out, const CrocTable& table);
void write_croc_theory_csv(std::ostream& out, const CrocTable& table);
void write_deflection_csv(std::ostream& out, const DeflectionTable& table,
                          std::uint64_t seed);
void write_energy_report(std::ostream& out, const EnergyReport& report);

/// File name pattern shared by all emitted artifacts.
std::string output_file_name(const std::string& experiment, const std::string& statistic,
                             std::uint64_t seed);

}  // namespace ddet
