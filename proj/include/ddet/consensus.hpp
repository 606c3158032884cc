#pragma once

#include <stdexcept>

#include "ddet/types.hpp"

namespace ddet {

/// Broadcast counter, the energy proxy of a consensus run: every node sends
/// exactly one message to its neighborhood per iteration.
struct TransmissionLedger {
  Eigen::VectorXi per_node_broadcasts;
  long long total_broadcasts = 0;

  TransmissionLedger() = default;
  explicit TransmissionLedger(Index n)
      : per_node_broadcasts(Eigen::VectorXi::Zero(n)) {}

  void record_round(Index n) {
    if (per_node_broadcasts.size() == 0)
      per_node_broadcasts = Eigen::VectorXi::Zero(n);
    if (per_node_broadcasts.size() != n)
      throw std::invalid_argument("ledger: node count changed between rounds");
    per_node_broadcasts.array() += 1;
    total_broadcasts += n;
  }

  void merge(const TransmissionLedger& other) {
    if (other.per_node_broadcasts.size() == 0) return;
    if (per_node_broadcasts.size() == 0) {
      *this = other;
      return;
    }
    if (per_node_broadcasts.size() != other.per_node_broadcasts.size())
      throw std::invalid_argument("ledger: merging ledgers of different networks");
    per_node_broadcasts += other.per_node_broadcasts;
    total_broadcasts += other.total_broadcasts;
  }
};

/// One synchronous averaging round a <- W a. Each node combines its own value
/// with its neighbors' broadcasts; the ledger charges one broadcast per node.
template <typename Scalar>
VectorX<Scalar> consensus_iterate(const MatrixX<Scalar>& weights,
                                  const VectorX<Scalar>& values,
                                  TransmissionLedger& ledger) {
  if (weights.rows() != weights.cols() || weights.rows() != values.size())
    throw std::invalid_argument("consensus_iterate: dimension mismatch");
  ledger.record_round(values.size());
  return weights * values;
}

/// Runs n_it averaging rounds from a(0) = values and returns N * a(n_it):
/// every node's estimate of the network-wide sum of the initial values.
template <typename Scalar>
VectorX<Scalar> spatial_sum(const MatrixX<Scalar>& weights, const VectorX<Scalar>& values,
                            int n_it, TransmissionLedger& ledger) {
  if (n_it < 1) throw std::invalid_argument("spatial_sum: n_it must be >= 1");
  VectorX<Scalar> state = values;
  for (int t = 0; t < n_it; ++t) state = consensus_iterate(weights, state, ledger);
  return static_cast<Scalar>(values.size()) * state;
}

}  // namespace ddet
