#include "ddet/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ddet/errors.hpp"

namespace ddet {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + text + "'");
  }
}

long long parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-integer value '" + text + "'");
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " has no '='");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty())
      throw ConfigError("config: line " + std::to_string(line_no) + " has empty key");
    if (config.values_.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    config.values_[key] = trim(stripped.substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  return parse(in);
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing required key '" + key + "'");
  consumed_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) {
  return has(key) ? get_string(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) {
  return parse_int(key, get_string(key));
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueConfig::get_seed(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const std::string text = get_string(key);
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-integer value '" + text + "'");
  }
}

double KeyValueConfig::get_double(const std::string& key) {
  return parse_double(key, get_string(key));
}

bool KeyValueConfig::get_bool(const std::string& key) {
  const std::string text = get_string(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: key '" + key + "' has non-boolean value '" + text + "'");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
  return has(key) ? get_bool(key) : fallback;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) {
  const std::string text = get_string(key);
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::string trimmed = trim(item);
    if (trimmed.empty())
      throw ConfigError("config: key '" + key + "' has an empty list element");
    out.push_back(parse_double(key, trimmed));
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' is an empty list");
  return out;
}

void KeyValueConfig::finish() const {
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError("config: unknown key(s): " + unknown);
}

std::vector<double> parse_grid_spec(const std::string& spec) {
  double start = 0.0, stop = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::stringstream stream(spec);
  if (!(stream >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
      !(step > 0.0) || stop < start || !stream.eof())
    throw ConfigError("grid spec: expected 'start:stop:step', got '" + spec + "'");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  grid.reserve(count);
  for (int i = 0; i < count; ++i) grid.push_back(start + i * step);
  return grid;
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  KeyValueConfig kv = KeyValueConfig::parse(in);
  ExperimentConfig config;
  config.n_sensors = static_cast<int>(kv.get_int("model.n_sensors"));
  if (kv.has("model.rho") && kv.has("model.covariance"))
    throw ConfigError("config: give model.rho or model.covariance, not both");
  if (kv.has("model.rho")) {
    config.rho = kv.get_double("model.rho");
  } else if (kv.has("model.covariance")) {
    const std::vector<double> flat = kv.get_double_list("model.covariance");
    const int n = config.n_sensors;
    if (static_cast<int>(flat.size()) != n * n)
      throw ConfigError("config: model.covariance must list n_sensors^2 values row-major");
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cov(i, j) = flat[i * n + j];
    config.covariance = cov;
  } else {
    throw ConfigError("config: missing model.rho or model.covariance");
  }
  const std::vector<double> theta1 = kv.get_double_list("model.theta1");
  if (static_cast<int>(theta1.size()) != config.n_sensors)
    throw ConfigError("config: model.theta1 length must equal model.n_sensors");
  config.theta1 = Eigen::Map<const Eigen::VectorXd>(theta1.data(), theta1.size());
  config.cov_known = kv.get_bool("model.cov_known");
  config.n_slots = static_cast<int>(kv.get_int("model.L"));

  if (kv.has("network.file")) {
    config.network_file = kv.get_string("network.file");
  } else {
    config.target_edges = static_cast<int>(kv.get_int("network.target_edges"));
    config.side = kv.get_double("network.side");
    config.network_seed = kv.get_seed("network.seed", 0);
  }
  config.n_it = static_cast<int>(kv.get_int("consensus.n_it"));
  config.n_trials = static_cast<int>(kv.get_int("mc.n_trials"));
  config.base_seed = kv.get_seed("mc.base_seed", 0);
  config.out_dir = kv.get_string("output.dir", ".");
  config.gamma_grid_size = static_cast<int>(kv.get_int("output.gamma_grid", 201));
  if (config.gamma_grid_size < 2)
    throw ConfigError("config: output.gamma_grid must be >= 2");
  if (config.n_trials < 1) throw ConfigError("config: mc.n_trials must be >= 1");
  if (config.n_it < 1) throw ConfigError("config: consensus.n_it must be >= 1");
  if (config.n_slots < 1) throw ConfigError("config: model.L must be >= 1");
  kv.finish();
  return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  return parse(in);
}

GaussianMeanModel ExperimentConfig::build_model() const {
  const Eigen::MatrixXd cov =
      covariance ? *covariance : build_toeplitz_cov(*rho, Eigen::Index{n_sensors});
  return make_gaussian_mean_model(Eigen::VectorXd::Zero(n_sensors), theta1, cov,
                                  cov_known);
}

SensorNetwork ExperimentConfig::build_network() const {
  if (network_file) {
    std::ifstream in(*network_file);
    if (!in) throw IoError("config: cannot open network file '" + *network_file + "'");
    SensorNetwork network = read_network(in);
    if (network.n() != n_sensors)
      throw ConfigError("config: network file node count differs from model.n_sensors");
    return network;
  }
  return generate_geometric_network(n_sensors, target_edges, side, network_seed);
}

DeflectionConfig DeflectionConfig::parse(std::istream& in) {
  KeyValueConfig kv = KeyValueConfig::parse(in);
  DeflectionConfig config;
  config.rhos = kv.get_double_list("deflection.rhos");
  config.phis_degrees = parse_grid_spec(kv.get_string("deflection.phis", "0:360:1"));
  config.norm_theta1 = kv.has("deflection.norm_theta1")
                           ? kv.get_double("deflection.norm_theta1")
                           : 1.0;
  config.n_slots = static_cast<int>(kv.get_int("deflection.L", 1));
  config.out_dir = kv.get_string("output.dir", ".");
  config.seed = kv.get_seed("mc.base_seed", 0);
  kv.finish();
  return config;
}

DeflectionConfig DeflectionConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  return parse(in);
}

}  // namespace ddet
