#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "ddet/consensus.hpp"
#include "ddet/errors.hpp"
#include "ddet/estimators.hpp"
#include "ddet/model.hpp"
#include "ddet/network.hpp"
#include "ddet/types.hpp"

namespace ddet {

/// A computed test statistic, stored as 2 log T. Nonnegative for every kind:
/// each numerator likelihood is maximized over a set containing the null fit.
struct StatisticValue {
  double two_log_value;
  StatisticKind kind;
};

inline Hypothesis decide(double statistic, double gamma) {
  return statistic >= gamma ? Hypothesis::H1 : Hypothesis::H0;
}

/// 2 log of the centralized GLR with known covariance:
/// L (mean - theta0)' C^{-1} (mean - theta0), via one triangular solve.
template <typename Scalar, typename D0, typename DC>
StatisticValue glr_known_cov(const ObservationBlockT<Scalar>& obs,
                             const Eigen::MatrixBase<D0>& theta0,
                             const Eigen::MatrixBase<DC>& cov) {
  const Index n = obs.n_sensors();
  if (theta0.size() != n || cov.rows() != n || cov.cols() != n)
    throw std::invalid_argument("glr_known_cov: dimension mismatch");
  Eigen::LLT<MatrixX<Scalar>> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("glr_known_cov: covariance is not SPD");
  const VectorX<Scalar> shift = local_mle(obs, true).means - theta0;
  const VectorX<Scalar> whitened = llt.matrixL().solve(shift);
  const double value = static_cast<double>(obs.n_slots()) * whitened.squaredNorm();
  return {value, StatisticKind::GlrKnownCov};
}

/// 2 log of the marginal-product statistic with known covariance:
/// L * sum_k (mean_k - theta0_k)^2 / C_kk. Only the diagonal enters.
template <typename Scalar, typename D0, typename DC>
StatisticValue lmp_known_cov(const ObservationBlockT<Scalar>& obs,
                             const Eigen::MatrixBase<D0>& theta0,
                             const Eigen::MatrixBase<DC>& diag_cov) {
  const Index n = obs.n_sensors();
  if (theta0.size() != n || diag_cov.size() != n)
    throw std::invalid_argument("lmp_known_cov: dimension mismatch");
  const VectorX<Scalar> diag = diag_cov;
  if ((diag.array() <= Scalar(0)).any())
    throw NumericError("lmp_known_cov: nonpositive variance entry");
  const VectorX<Scalar> shift = local_mle(obs, true).means - theta0;
  const double value = static_cast<double>(obs.n_slots()) *
                       (shift.array().square() / diag.array()).sum();
  return {value, StatisticKind::LmpKnownCov};
}

/// Per-node log likelihood ratio against the null mean, known variance:
/// T_k = L (mean_k - theta0_k)^2 / (2 var_k).
template <typename Derived>
typename Derived::Scalar local_term(const Eigen::MatrixBase<Derived>& samples,
                                    typename Derived::Scalar theta0_k,
                                    typename Derived::Scalar var_k) {
  using Scalar = typename Derived::Scalar;
  const Index n_slots = samples.size();
  if (n_slots < 1) throw std::invalid_argument("local_term: empty sample row");
  if (!(var_k > Scalar(0))) throw NumericError("local_term: nonpositive variance");
  const Scalar shift = samples.mean() - theta0_k;
  return Scalar(n_slots) * shift * shift / (Scalar(2) * var_k);
}

/// Per-node log likelihood ratio with the variance fitted under each
/// hypothesis: T_k = (L/2) log(s0/s1), where s1 is the sample variance about
/// the fitted mean and s0 = s1 + (mean_k - theta0_k)^2 the variance about the
/// null mean (exact shift identity).
template <typename Derived>
typename Derived::Scalar local_term(const Eigen::MatrixBase<Derived>& samples,
                                    typename Derived::Scalar theta0_k) {
  using Scalar = typename Derived::Scalar;
  const Index n_slots = samples.size();
  if (n_slots < 2)
    throw std::invalid_argument("local_term: variance fit needs at least two slots");
  const Scalar mean = samples.mean();
  const Scalar s1 = (samples.array() - mean).square().sum() / Scalar(n_slots);
  if (!(s1 > Scalar(0)))
    throw NumericError("local_term: degenerate node data (zero sample variance)");
  const Scalar shift = mean - theta0_k;
  const Scalar s0 = s1 + shift * shift;
  return Scalar(n_slots) / Scalar(2) * std::log(s0 / s1);
}

/// 2 log of the marginal-product statistic with per-node variances estimated:
/// 2 sum_k T_k = L sum_k log(1 + (mean_k - theta0_k)^2 / s1_k).
template <typename Scalar, typename D0>
StatisticValue lmp_unknown_cov(const ObservationBlockT<Scalar>& obs,
                               const Eigen::MatrixBase<D0>& theta0) {
  if (theta0.size() != obs.n_sensors())
    throw std::invalid_argument("lmp_unknown_cov: dimension mismatch");
  double total = 0.0;
  for (Index k = 0; k < obs.n_sensors(); ++k)
    total += static_cast<double>(local_term(obs.data.row(k), Scalar(theta0[k])));
  return {2.0 * total, StatisticKind::LmpUnknownCov};
}

/// 2 log of the exact Gaussian GLR with mean and covariance jointly fitted
/// under each hypothesis: L log(det S0 / det S1), S_i the scatter matrices
/// about theta0 and about the sample mean (divisor L).
template <typename Scalar, typename D0>
StatisticValue glr_unknown_cov(const ObservationBlockT<Scalar>& obs,
                               const Eigen::MatrixBase<D0>& theta0_expr) {
  const VectorX<Scalar> theta0 = theta0_expr;
  const Index n = obs.n_sensors();
  const Index n_slots = obs.n_slots();
  if (theta0.size() != n) throw std::invalid_argument("glr_unknown_cov: dimension mismatch");
  if (n_slots < n + 1)
    throw std::invalid_argument("glr_unknown_cov: needs L >= N+1 slots");
  const VectorX<Scalar> mean = local_mle(obs, true).means;
  const MatrixX<Scalar> centered1 = obs.data.colwise() - mean;
  const MatrixX<Scalar> centered0 = obs.data.colwise() - theta0;
  const MatrixX<Scalar> scatter1 = (centered1 * centered1.transpose()) / Scalar(n_slots);
  const MatrixX<Scalar> scatter0 = (centered0 * centered0.transpose()) / Scalar(n_slots);
  Eigen::LLT<MatrixX<Scalar>> llt1(scatter1);
  if (llt1.info() != Eigen::Success)
    throw NumericError("glr_unknown_cov: singular sample covariance under H1 fit");
  Eigen::LLT<MatrixX<Scalar>> llt0(scatter0);
  if (llt0.info() != Eigen::Success)
    throw NumericError("glr_unknown_cov: singular sample covariance under H0 fit");
  const double log_det1 =
      2.0 * MatrixX<Scalar>(llt1.matrixL()).diagonal().array().log().sum();
  const double log_det0 =
      2.0 * MatrixX<Scalar>(llt0.matrixL()).diagonal().array().log().sum();
  const double value =
      std::max(0.0, static_cast<double>(n_slots) * (log_det0 - log_det1));
  return {value, StatisticKind::GlrUnknownCov};
}

/// Algebraically equal route to glr_unknown_cov through the matrix
/// determinant lemma: L log(1 + (mean - theta0)' S1^{-1} (mean - theta0)).
/// Kept as an independent cross-check of the determinant form.
template <typename Scalar, typename D0>
StatisticValue glr_unknown_cov_quadform(const ObservationBlockT<Scalar>& obs,
                                        const Eigen::MatrixBase<D0>& theta0_expr) {
  const VectorX<Scalar> theta0 = theta0_expr;
  const Index n = obs.n_sensors();
  const Index n_slots = obs.n_slots();
  if (theta0.size() != n)
    throw std::invalid_argument("glr_unknown_cov_quadform: dimension mismatch");
  if (n_slots < n + 1)
    throw std::invalid_argument("glr_unknown_cov_quadform: needs L >= N+1 slots");
  const VectorX<Scalar> mean = local_mle(obs, true).means;
  const MatrixX<Scalar> centered = obs.data.colwise() - mean;
  const MatrixX<Scalar> scatter1 = (centered * centered.transpose()) / Scalar(n_slots);
  Eigen::LLT<MatrixX<Scalar>> llt(scatter1);
  if (llt.info() != Eigen::Success)
    throw NumericError("glr_unknown_cov_quadform: singular sample covariance");
  const VectorX<Scalar> whitened = llt.matrixL().solve(VectorX<Scalar>(mean - theta0));
  const double value =
      static_cast<double>(n_slots) * std::log1p(whitened.squaredNorm());
  return {value, StatisticKind::GlrUnknownCov};
}

/// Algorithm: each node computes its local term from its own row, the network
/// runs one SpatialSum over the terms, and every node ends up with its own
/// copy of the statistic. Returns the per-node values 2 N a_k(n_it); with
/// exact consensus every entry equals the centralized 2 sum_k T_k.
/// Pass diag_cov when the covariance is known, nullopt to fit per-node
/// variances.
inline Eigen::VectorXd lmp_distributed(const ObservationBlock& obs,
                                       const SensorNetwork& network,
                                       const Eigen::VectorXd& theta0,
                                       const std::optional<Eigen::VectorXd>& diag_cov,
                                       int n_it, TransmissionLedger& ledger) {
  const Index n = obs.n_sensors();
  if (network.n() != n)
    throw std::invalid_argument("lmp_distributed: network/observation size mismatch");
  if (theta0.size() != n)
    throw std::invalid_argument("lmp_distributed: theta0 size mismatch");
  if (diag_cov && diag_cov->size() != n)
    throw std::invalid_argument("lmp_distributed: diag_cov size mismatch");
  Eigen::VectorXd terms(n);
  for (Index k = 0; k < n; ++k)
    terms[k] = diag_cov ? local_term(obs.data.row(k), theta0[k], (*diag_cov)[k])
                        : local_term(obs.data.row(k), theta0[k]);
  return 2.0 * spatial_sum(network.weights, terms, n_it, ledger);
}

}  // namespace ddet
