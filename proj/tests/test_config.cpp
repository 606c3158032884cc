#include <doctest.h>

#include <sstream>

#include "ddet/config.hpp"
#include "ddet/errors.hpp"

using namespace ddet;

namespace {

const char* kCrocConfig =
    "# paper-style scenario\n"
    "model.n_sensors=10\n"
    "model.rho=0.3\n"
    "model.theta1=0.24,0.37,0.24,0.38,0.30,0.32,0.35,0.30,0.26,0.24\n"
    "model.cov_known=true\n"
    "model.L=20\n"
    "network.target_edges=20\n"
    "network.side=100\n"
    "network.seed=7\n"
    "consensus.n_it=20\n"
    "mc.n_trials=1000\n"
    "mc.base_seed=42\n"
    "output.dir=out\n"
    "output.gamma_grid=201\n";

}  // namespace

TEST_CASE("experiment config: full round trip into model and network") {
  std::istringstream in(kCrocConfig);
  const ExperimentConfig config = ExperimentConfig::parse(in);
  CHECK(config.n_sensors == 10);
  CHECK(config.rho == doctest::Approx(0.3));
  CHECK(config.cov_known);
  CHECK(config.n_slots == 20);
  CHECK(config.n_trials == 1000);
  CHECK(config.base_seed == 42);
  CHECK(config.gamma_grid_size == 201);
  const GaussianMeanModel model = config.build_model();
  CHECK(model.n_sensors() == 10);
  CHECK(model.theta1[1] == 0.37);
  CHECK(model.cov(0, 1) == doctest::Approx(0.3));
  const SensorNetwork network = config.build_network();
  CHECK(network.n() == 10);
  CHECK(network.edges.size() == 20);
}

TEST_CASE("experiment config: unknown keys, missing keys and bad values are rejected") {
  SUBCASE("unknown key") {
    std::istringstream in(std::string(kCrocConfig) + "model.typo=1\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(in), ConfigError);
  }
  SUBCASE("missing covariance source") {
    std::string text(kCrocConfig);
    text.erase(text.find("model.rho=0.3\n"), 14);
    std::istringstream in(text);
    CHECK_THROWS_AS(ExperimentConfig::parse(in), ConfigError);
  }
  SUBCASE("theta1 length mismatch") {
    std::string text(kCrocConfig);
    text.replace(text.find("model.n_sensors=10"), 18, "model.n_sensors=9 ");
    std::istringstream in(text);
    CHECK_THROWS_AS(ExperimentConfig::parse(in), ConfigError);
  }
  SUBCASE("non-numeric value") {
    std::string text(kCrocConfig);
    text.replace(text.find("mc.n_trials=1000"), 16, "mc.n_trials=lots");
    std::istringstream in(text);
    CHECK_THROWS_AS(ExperimentConfig::parse(in), ConfigError);
  }
  SUBCASE("duplicate key") {
    std::istringstream in(std::string(kCrocConfig) + "model.rho=0.5\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(in), ConfigError);
  }
}

TEST_CASE("experiment config: explicit covariance matrix instead of rho") {
  const std::string theta_line =
      "model.theta1=0.24,0.37,0.24,0.38,0.30,0.32,0.35,0.30,0.26,0.24";
  std::string text(kCrocConfig);
  text.replace(text.find("model.n_sensors=10"), 18, "model.n_sensors=2 ");
  text.replace(text.find("model.rho=0.3\n"), 14,
               "model.covariance=1.0,0.25,0.25,1.0\n");
  text.replace(text.find(theta_line), theta_line.size(), "model.theta1=0.3,0.4");
  text.replace(text.find("network.target_edges=20"), 23, "network.target_edges=1 ");
  std::istringstream in(text);
  const ExperimentConfig config = ExperimentConfig::parse(in);
  REQUIRE(config.covariance.has_value());
  const GaussianMeanModel model = config.build_model();
  CHECK(model.cov(0, 1) == 0.25);
  CHECK_FALSE(config.rho.has_value());
}

TEST_CASE("deflection config and grid specs") {
  std::istringstream in(
      "deflection.rhos=0,0.3,0.5,0.8\n"
      "deflection.phis=0:360:1\n"
      "deflection.norm_theta1=1.0\n"
      "deflection.L=20\n"
      "output.dir=out\n");
  const DeflectionConfig config = DeflectionConfig::parse(in);
  CHECK(config.rhos.size() == 4);
  CHECK(config.phis_degrees.size() == 361);
  CHECK(config.phis_degrees.front() == 0.0);
  CHECK(config.phis_degrees.back() == 360.0);
  CHECK(config.n_slots == 20);

  CHECK(parse_grid_spec("0:10:2.5") == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
  CHECK_THROWS_AS(parse_grid_spec("10:0:1"), ConfigError);
  CHECK_THROWS_AS(parse_grid_spec("0:10:0"), ConfigError);
  CHECK_THROWS_AS(parse_grid_spec("nonsense"), ConfigError);
}
