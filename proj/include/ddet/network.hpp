#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ddet {

/// Pair list of node indices with i < j; kept sorted lexicographically.
using EdgeList = std::vector<std::pair<int, int>>;

/// Random geometric network with local-degree consensus weights.
/// Invariants established at construction: connected, not bipartite,
/// weights symmetric row-stochastic with support on the edge set.
struct SensorNetwork {
  Eigen::Matrix<double, Eigen::Dynamic, 2> positions;  // [0, side]^2, meters
  double side = 0.0;
  EdgeList edges;
  Eigen::VectorXi degrees;
  Eigen::MatrixXd weights;

  int n() const { return static_cast<int>(positions.rows()); }
};

bool is_connected(const EdgeList& edges, int n);
bool is_bipartite(const EdgeList& edges, int n);

/// W(k,j) = 1/max(d_k, d_j) on edges, zero elsewhere off the diagonal, and
/// W(k,k) chosen so each row sums to one.
Eigen::MatrixXd local_degree_weights(const EdgeList& edges, int n);

/// Second-largest eigenvalue modulus of W: the asymptotic per-iteration
/// contraction of the consensus error. Strictly below 1 exactly when the
/// graph is connected and not bipartite.
double spectral_convergence_factor(const Eigen::MatrixXd& weights);

/// Drops n points uniformly on the square and connects the `target_edges`
/// closest pairs (ties broken by node-pair order). Positions are redrawn with
/// the next derived seed until the graph is connected and non-bipartite;
/// after `retry_cap` redraws the (n, target_edges) combination is rejected.
SensorNetwork generate_geometric_network(int n, int target_edges, double side,
                                         std::uint64_t seed, int retry_cap = 1000);

/// Plain-text form: "N side", then N position lines "x y", then edge lines
/// "i j" (0-based). Doubles are printed with 17 significant digits so the
/// round trip is exact and files are byte-stable.
void write_network(std::ostream& out, const SensorNetwork& network);
SensorNetwork read_network(std::istream& in);
std::string network_to_string(const SensorNetwork& network);

/// FNV-1a over the serialized text; identifies a topology in CSV metadata.
std::uint64_t network_hash(const SensorNetwork& network);

}  // namespace ddet
