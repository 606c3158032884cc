#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddet/model.hpp"
#include "ddet/network.hpp"

namespace ddet {

/// Flat `key=value` file with `#` comment lines and block-prefixed keys
/// (model.rho=0.3). Typed getters throw ConfigError; finish() rejects keys
/// nobody consumed, which catches typos early.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  long long get_int(const std::string& key);
  long long get_int(const std::string& key, long long fallback);
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);
  double get_double(const std::string& key);
  bool get_bool(const std::string& key);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key);

  /// Throws if any key was never consumed.
  void finish() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

/// Everything a CROC run needs, straight from one config file.
struct ExperimentConfig {
  // model
  int n_sensors = 0;
  std::optional<double> rho;                 // Toeplitz parameter ...
  std::optional<Eigen::MatrixXd> covariance; // ... or an explicit matrix
  Eigen::VectorXd theta1;
  bool cov_known = true;
  int n_slots = 0;
  // network: generated from (target_edges, side, seed) or loaded from a file
  int target_edges = 0;
  double side = 0.0;
  std::uint64_t network_seed = 0;
  std::optional<std::string> network_file;
  // consensus
  int n_it = 0;
  // monte carlo
  int n_trials = 0;
  std::uint64_t base_seed = 0;
  // output
  std::string out_dir = ".";
  int gamma_grid_size = 201;

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_file(const std::string& path);

  GaussianMeanModel build_model() const;
  SensorNetwork build_network() const;
};

/// Config for the deflection-ratio sweep (two-sensor polar scan).
struct DeflectionConfig {
  std::vector<double> rhos;
  std::vector<double> phis_degrees;
  double norm_theta1 = 1.0;
  int n_slots = 1;
  std::string out_dir = ".";
  std::uint64_t seed = 0;  // metadata only; the sweep is closed-form

  static DeflectionConfig parse(std::istream& in);
  static DeflectionConfig parse_file(const std::string& path);
};

/// Expands "start:stop:step" (degrees) into a grid, stop included when hit.
std::vector<double> parse_grid_spec(const std::string& spec);

}  // namespace ddet
