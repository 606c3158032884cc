#include <doctest.h>

#include <sstream>

#include "ddet/experiments.hpp"

using namespace ddet;

namespace {

CrocOptions small_options(bool cov_known, int n_trials = 400) {
  Eigen::VectorXd theta1(10);
  theta1 << 0.24, 0.37, 0.24, 0.38, 0.30, 0.32, 0.35, 0.30, 0.26, 0.24;
  CrocOptions options;
  options.model = make_toeplitz_model(0.3, theta1, cov_known);
  options.network = generate_geometric_network(10, 20, 100.0, 7);
  options.n_slots = 20;
  options.n_it = 20;
  options.n_trials = n_trials;
  options.base_seed = 99;
  options.gamma_grid_size = 51;
  options.threads = 1;
  options.rho = 0.3;
  return options;
}

std::string table_to_string(const CrocTable& table) {
  std::ostringstream out;
  write_croc_csv(out, table);
  return out.str();
}

}  // namespace

TEST_CASE("croc experiment: monotone curves, sane probabilities, filled metadata") {
  const CrocResult result = run_croc_experiment(small_options(true));
  REQUIRE(result.tables.size() == 2);
  for (const CrocTable& table : result.tables) {
    REQUIRE(table.rows.size() == 51);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const CrocRow& row = table.rows[i];
      for (const double p : {row.pfa_mc, row.pmd_mc, row.pfa_theory, row.pmd_theory}) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
      }
      CHECK(row.stderr_pfa ==
            doctest::Approx(std::sqrt(row.pfa_mc * (1.0 - row.pfa_mc) / 400)));
      if (i > 0) {
        CHECK(row.gamma >= table.rows[i - 1].gamma);
        CHECK(row.pfa_mc <= table.rows[i - 1].pfa_mc);
        CHECK(row.pmd_mc >= table.rows[i - 1].pmd_mc);
        CHECK(row.pfa_theory <= table.rows[i - 1].pfa_theory + 1e-12);
        CHECK(row.pmd_theory >= table.rows[i - 1].pmd_theory - 1e-12);
      }
    }
    CHECK(table.net_hash != 0);
    CHECK(table.n_trials == 400);
  }
  CHECK(result.tables[0].kind == StatisticKind::GlrKnownCov);
  CHECK(result.tables[1].kind == StatisticKind::LmpKnownCov);
  // Both hypotheses of every trial run the distributed pipeline.
  CHECK(result.ledger.total_broadcasts == 2LL * 400 * 10 * 20);
}

TEST_CASE("croc experiment: unknown-covariance statistics and regime checks") {
  const CrocResult result = run_croc_experiment(small_options(false));
  REQUIRE(result.tables.size() == 2);
  CHECK(result.tables[0].kind == StatisticKind::GlrUnknownCov);
  CHECK(result.tables[1].kind == StatisticKind::LmpUnknownCov);

  CrocOptions conflicted = small_options(false);
  conflicted.kinds = {StatisticKind::GlrKnownCov};
  CHECK_THROWS_AS(run_croc_experiment(conflicted), std::invalid_argument);
}

TEST_CASE("croc experiment: output bytes independent of thread count") {
  CrocOptions base = small_options(true);
  const CrocResult serial = run_croc_experiment(base);
  base.threads = 4;
  const CrocResult threaded = run_croc_experiment(base);
  REQUIRE(serial.tables.size() == threaded.tables.size());
  for (std::size_t i = 0; i < serial.tables.size(); ++i)
    CHECK(table_to_string(serial.tables[i]) == table_to_string(threaded.tables[i]));
  CHECK(serial.ledger.total_broadcasts == threaded.ledger.total_broadcasts);
  // And a repeat run reproduces the bytes too.
  base.threads = 1;
  const CrocResult repeat = run_croc_experiment(base);
  CHECK(table_to_string(serial.tables[0]) == table_to_string(repeat.tables[0]));
}

TEST_CASE("deflection sweep: unit ratio at rho 0, extrema at the diagonal directions") {
  std::vector<double> phis;
  for (int d = 0; d < 360; ++d) phis.push_back(d);
  const DeflectionTable table = deflection_sweep({0.0, 0.5}, phis, 1.0, 20);
  REQUIRE(table.rows.size() == 720);
  double max_ratio = 0.0, min_ratio = 1e9;
  int argmax = -1, argmin = -1;
  for (const DeflectionRow& row : table.rows) {
    if (row.rho == 0.0) CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-14));
    if (row.rho == 0.5) {
      if (row.ratio > max_ratio) {
        max_ratio = row.ratio;
        argmax = static_cast<int>(row.phi_degrees);
      }
      if (row.ratio < min_ratio) {
        min_ratio = row.ratio;
        argmin = static_cast<int>(row.phi_degrees);
      }
    }
  }
  CHECK((argmax == 45 || argmax == 225));
  CHECK((argmin == 135 || argmin == 315));
  CHECK(max_ratio > 1.0);
  CHECK(min_ratio < 1.0);
}

TEST_CASE("deflection sweep is exactly invariant to the shift norm and to L") {
  std::vector<double> phis{10.0, 45.0, 77.0, 135.0, 201.0};
  const DeflectionTable a = deflection_sweep({0.4}, phis, 1.0, 20);
  const DeflectionTable b = deflection_sweep({0.4}, phis, 3.7, 20);
  const DeflectionTable c = deflection_sweep({0.4}, phis, 1.0, 500);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    CHECK(a.rows[i].ratio == doctest::Approx(b.rows[i].ratio).epsilon(1e-13));
    CHECK(a.rows[i].ratio == doctest::Approx(c.rows[i].ratio).epsilon(1e-13));
  }
}

TEST_CASE("energy report: measured consensus cost N*n_it, modeled GLR cost c*N^2") {
  const EnergyReport report = energy_report(10, 20, StatisticKind::LmpKnownCov);
  CHECK(report.lmp_measured_broadcasts == 200);
  CHECK(report.glr_modeled_messages == 100);
  const EnergyReport single = energy_report(1, 20, StatisticKind::LmpKnownCov);
  CHECK(single.lmp_measured_broadcasts == 20);
  CHECK(single.glr_modeled_messages == 1);
  // Doubling N doubles the consensus cost and quadruples the modeled GLR cost.
  const EnergyReport doubled = energy_report(20, 20, StatisticKind::GlrKnownCov);
  CHECK(doubled.lmp_measured_broadcasts == 2 * report.lmp_measured_broadcasts);
  CHECK(doubled.glr_modeled_messages == 4 * report.glr_modeled_messages);
}

TEST_CASE("estimator asymptotics validation report on a small run") {
  Eigen::VectorXd theta1 = Eigen::VectorXd::Constant(4, 0.3);
  const GaussianMeanModel model = make_toeplitz_model(0.3, theta1, true);
  const EstimatorValidationReport report =
      validate_estimator_asymptotics(model, 20, 20000, 7);
  CHECK(report.predicted.isApprox(model.cov / 20.0, 1e-12));
  CHECK(report.max_diag_rel_error < 0.05);
  CHECK(report.max_offdiag_abs_error < 0.005);
  // More slots, tighter estimates: compare against a longer-L run.
  const EstimatorValidationReport longer =
      validate_estimator_asymptotics(model, 200, 20000, 7);
  CHECK(longer.max_diag_rel_error < 0.05);
}

TEST_CASE("csv writers: header metadata carries the seed") {
  const CrocResult result = run_croc_experiment(small_options(true, 100));
  const std::string text = table_to_string(result.tables[0]);
  CHECK(text.find("# seed=99") != std::string::npos);
  CHECK(text.find("# statistic=glr_known") != std::string::npos);
  CHECK(text.find("gamma,pfa_mc,pmd_mc,") != std::string::npos);
  CHECK(output_file_name("croc", "lmp_known", 99) == "croc_lmp_known_99.csv");
}
