#include "ddet/network.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "ddet/errors.hpp"
#include "ddet/rng.hpp"

namespace ddet {

namespace {

std::vector<std::vector<int>> adjacency(const EdgeList& edges, int n) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw std::invalid_argument("network: edge endpoint out of range");
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  return adj;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

bool is_connected(const EdgeList& edges, int n) {
  if (n <= 0) return false;
  const auto adj = adjacency(edges, n);
  std::vector<char> seen(n, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int visited = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        queue.push_back(w);
      }
  }
  return visited == n;
}

bool is_bipartite(const EdgeList& edges, int n) {
  const auto adj = adjacency(edges, n);
  std::vector<int> color(n, -1);
  for (int start = 0; start < n; ++start) {
    if (color[start] != -1) continue;
    color[start] = 0;
    std::deque<int> queue{start};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const int w : adj[v]) {
        if (color[w] == -1) {
          color[w] = 1 - color[v];
          queue.push_back(w);
        } else if (color[w] == color[v]) {
          return false;
        }
      }
    }
  }
  return true;
}

Eigen::MatrixXd local_degree_weights(const EdgeList& edges, int n) {
  const auto adj = adjacency(edges, n);
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : edges) {
    const double w = 1.0 / std::max(adj[i].size(), adj[j].size());
    weights(i, j) = w;
    weights(j, i) = w;
  }
  for (int k = 0; k < n; ++k) {
    double row = 0.0;
    for (const int j : adj[k]) row += weights(k, j);
    weights(k, k) = 1.0 - row;
  }
  return weights;
}

double spectral_convergence_factor(const Eigen::MatrixXd& weights) {
  const Eigen::Index n = weights.rows();
  if (n != weights.cols()) throw std::invalid_argument("weights must be square");
  if (n == 1) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(weights);
  if (solver.info() != Eigen::Success)
    throw NumericError("spectral_convergence_factor: eigensolver failed");
  const Eigen::VectorXd evals = solver.eigenvalues();  // ascending
  // Drop one copy of the top eigenvalue (the consensus eigenvalue 1).
  return std::max(std::abs(evals[0]), std::abs(evals[n - 2]));
}

SensorNetwork generate_geometric_network(int n, int target_edges, double side,
                                         std::uint64_t seed, int retry_cap) {
  if (n < 2) throw std::invalid_argument("generate_geometric_network: n must be >= 2");
  if (!(side > 0.0))
    throw std::invalid_argument("generate_geometric_network: side must be positive");
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  if (target_edges < n - 1 || target_edges > max_edges)
    throw std::invalid_argument(
        "generate_geometric_network: target_edges must lie in [n-1, n(n-1)/2]");

  for (int attempt = 0; attempt <= retry_cap; ++attempt) {
    Pcg32 rng(derive_seed(seed, attempt));
    Eigen::Matrix<double, Eigen::Dynamic, 2> positions(n, 2);
    for (int k = 0; k < n; ++k) {
      positions(k, 0) = side * rng.next_double();
      positions(k, 1) = side * rng.next_double();
    }

    // Edge set = the target_edges closest pairs. Equivalent to growing the
    // distance threshold until the edge count is reached; distance ties are
    // broken by node-pair order so the construction is deterministic.
    std::vector<std::tuple<double, int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(max_edges));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double dx = positions(i, 0) - positions(j, 0);
        const double dy = positions(i, 1) - positions(j, 1);
        pairs.emplace_back(dx * dx + dy * dy, i, j);
      }
    std::sort(pairs.begin(), pairs.end());

    EdgeList edges;
    edges.reserve(target_edges);
    for (int e = 0; e < target_edges; ++e)
      edges.emplace_back(std::get<1>(pairs[e]), std::get<2>(pairs[e]));
    std::sort(edges.begin(), edges.end());

    if (!is_connected(edges, n) || is_bipartite(edges, n)) continue;

    SensorNetwork network;
    network.positions = std::move(positions);
    network.side = side;
    network.edges = std::move(edges);
    network.weights = local_degree_weights(network.edges, n);
    network.degrees = Eigen::VectorXi::Zero(n);
    for (const auto& [i, j] : network.edges) {
      network.degrees[i] += 1;
      network.degrees[j] += 1;
    }
    return network;
  }
  throw NumericError(
      "generate_geometric_network: retry cap exceeded; no connected non-bipartite "
      "graph with the requested edge count");
}

void write_network(std::ostream& out, const SensorNetwork& network) {
  out << network.n() << ' ' << format_double(network.side) << '\n';
  for (int k = 0; k < network.n(); ++k)
    out << format_double(network.positions(k, 0)) << ' '
        << format_double(network.positions(k, 1)) << '\n';
  for (const auto& [i, j] : network.edges) out << i << ' ' << j << '\n';
}

std::string network_to_string(const SensorNetwork& network) {
  std::ostringstream out;
  write_network(out, network);
  return out.str();
}

SensorNetwork read_network(std::istream& in) {
  int n = 0;
  double side = 0.0;
  if (!(in >> n >> side) || n < 2 || !(side > 0.0))
    throw IoError("network file: bad header line");
  SensorNetwork network;
  network.side = side;
  network.positions.resize(n, 2);
  for (int k = 0; k < n; ++k)
    if (!(in >> network.positions(k, 0) >> network.positions(k, 1)))
      throw IoError("network file: bad position line");
  int i = 0, j = 0;
  while (in >> i >> j) {
    if (i >= j || i < 0 || j >= n) throw IoError("network file: bad edge line");
    network.edges.emplace_back(i, j);
  }
  if (network.edges.empty()) throw IoError("network file: no edges");
  if (!std::is_sorted(network.edges.begin(), network.edges.end()))
    std::sort(network.edges.begin(), network.edges.end());
  if (std::adjacent_find(network.edges.begin(), network.edges.end()) !=
      network.edges.end())
    throw IoError("network file: duplicate edge");
  if (!is_connected(network.edges, n)) throw IoError("network file: graph not connected");
  if (is_bipartite(network.edges, n))
    throw IoError("network file: graph is bipartite; consensus would not converge");
  network.weights = local_degree_weights(network.edges, n);
  network.degrees = Eigen::VectorXi::Zero(n);
  for (const auto& [a, b] : network.edges) {
    network.degrees[a] += 1;
    network.degrees[b] += 1;
  }
  return network;
}

std::uint64_t network_hash(const SensorNetwork& network) {
  const std::string text = network_to_string(network);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace ddet
