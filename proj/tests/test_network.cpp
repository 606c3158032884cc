#include <doctest.h>

#include <sstream>

#include "ddet/consensus.hpp"
#include "ddet/errors.hpp"
#include "ddet/network.hpp"
#include "ddet/rng.hpp"

using namespace ddet;

namespace {
const EdgeList kTriangle = {{0, 1}, {0, 2}, {1, 2}};
const EdgeList kPath3 = {{0, 1}, {1, 2}};
}  // namespace

TEST_CASE("connectivity and bipartiteness classify the small graphs") {
  CHECK(is_connected(kTriangle, 3));
  CHECK_FALSE(is_bipartite(kTriangle, 3));
  CHECK(is_connected(kPath3, 3));
  CHECK(is_bipartite(kPath3, 3));
  const EdgeList disjoint = {{0, 1}, {2, 3}};
  CHECK_FALSE(is_connected(disjoint, 4));
}

TEST_CASE("local-degree weights: triangle") {
  const Eigen::MatrixXd weights = local_degree_weights(kTriangle, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(weights(i, i) == doctest::Approx(0.0));
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(weights(i, j) == 0.5);
  }
}

TEST_CASE("local-degree weights: path uses 1/max(degree) and fills the diagonal") {
  const Eigen::MatrixXd weights = local_degree_weights(kPath3, 3);
  CHECK(weights(0, 1) == 0.5);
  CHECK(weights(1, 2) == 0.5);
  CHECK(weights(0, 0) == 0.5);
  CHECK(weights(1, 1) == 0.0);
  CHECK(weights(2, 2) == 0.5);
  CHECK(weights(0, 2) == 0.0);
}

TEST_CASE("spectral convergence factor") {
  SUBCASE("triangle: eigenvalues {1, -1/2, -1/2} give 0.5") {
    // (J - I)/2 has spectrum {1, -1/2, -1/2} because J has {3, 0, 0}.
    CHECK(spectral_convergence_factor(local_degree_weights(kTriangle, 3)) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("disconnected graph keeps a second eigenvalue at 1") {
    const EdgeList two_triangles = {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}};
    CHECK(spectral_convergence_factor(local_degree_weights(two_triangles, 6)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("generated network matches the requested size and the construction invariants") {
  const SensorNetwork network = generate_geometric_network(10, 20, 100.0, 7);
  CHECK(network.n() == 10);
  CHECK(network.edges.size() == 20);
  CHECK(is_connected(network.edges, 10));
  CHECK_FALSE(is_bipartite(network.edges, 10));
  CHECK(spectral_convergence_factor(network.weights) < 1.0);
  // Row-stochastic and symmetric by construction.
  const Eigen::VectorXd row_sums = network.weights.rowwise().sum();
  CHECK((row_sums.array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK((network.weights - network.weights.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // Support confined to the edge set.
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) {
      const bool has_edge =
          std::find(network.edges.begin(), network.edges.end(), std::make_pair(i, j)) !=
          network.edges.end();
      if (!has_edge) CHECK(network.weights(i, j) == 0.0);
      if (has_edge)
        CHECK(network.weights(i, j) ==
              1.0 / std::max(network.degrees[i], network.degrees[j]));
    }
  // Positions stay inside the square.
  CHECK(network.positions.minCoeff() >= 0.0);
  CHECK(network.positions.maxCoeff() <= 100.0);
}

TEST_CASE("two nodes, one edge is always bipartite: generator fails at the retry cap") {
  CHECK_THROWS_AS(generate_geometric_network(2, 1, 100.0, 1, 50), NumericError);
}

TEST_CASE("generator rejects out-of-range edge counts") {
  CHECK_THROWS_AS(generate_geometric_network(10, 8, 100.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_geometric_network(10, 46, 100.0, 1), std::invalid_argument);
}

TEST_CASE("consensus contraction bound holds on a generated network") {
  const SensorNetwork network = generate_geometric_network(10, 20, 100.0, 3);
  const double factor = spectral_convergence_factor(network.weights);
  Pcg32 rng(5);
  Eigen::VectorXd values(10);
  for (int k = 0; k < 10; ++k) values[k] = rng.next_normal();
  const double target = values.mean();
  Eigen::VectorXd residual0 = values.array() - target;
  TransmissionLedger ledger;
  Eigen::VectorXd state = values;
  for (int t = 1; t <= 30; ++t) {
    state = consensus_iterate(network.weights, state, ledger);
    const double err = (state.array() - target).matrix().norm();
    CHECK(err <= std::pow(factor, t) * residual0.norm() * (1.0 + 1e-10));
  }
}

TEST_CASE("network text round trip is exact and byte-stable") {
  const SensorNetwork network = generate_geometric_network(10, 20, 100.0, 9);
  const std::string text = network_to_string(network);
  std::istringstream in(text);
  const SensorNetwork reread = read_network(in);
  CHECK(network_to_string(reread) == text);
  CHECK(reread.positions == network.positions);
  CHECK(reread.edges == network.edges);
  CHECK(reread.weights == network.weights);
  CHECK(network_hash(reread) == network_hash(network));
}

TEST_CASE("network reader rejects malformed files") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_network(empty), IoError);
  // A path graph is bipartite: valid syntax, rejected semantics.
  std::istringstream bipartite("3 10\n0 0\n1 0\n2 0\n0 1\n1 2\n");
  CHECK_THROWS_AS(read_network(bipartite), IoError);
}
