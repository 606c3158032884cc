#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "ddet/errors.hpp"
#include "ddet/model.hpp"
#include "ddet/types.hpp"

namespace ddet {

/// Per-node maximum-likelihood fit from each node's own samples.
/// `variances` is present only when the covariance is being estimated.
template <typename Scalar>
struct LocalEstimatesT {
  VectorX<Scalar> means;
  std::optional<VectorX<Scalar>> variances;
};
using LocalEstimates = LocalEstimatesT<double>;

template <typename Scalar>
struct GlobalMleT {
  VectorX<Scalar> mean;
  std::optional<MatrixX<Scalar>> covariance;
};
using GlobalMle = GlobalMleT<double>;

/// Local MLE: means are the row averages; with unknown covariance each node
/// also fits its own variance with divisor L (the likelihood maximizer).
template <typename Scalar>
LocalEstimatesT<Scalar> local_mle(const ObservationBlockT<Scalar>& obs, bool cov_known) {
  const Index n_slots = obs.n_slots();
  if (n_slots < 1) throw std::invalid_argument("local_mle: empty observation block");
  LocalEstimatesT<Scalar> est;
  est.means = obs.data.rowwise().mean();
  if (!cov_known) {
    if (n_slots < 2)
      throw std::invalid_argument("local_mle: variance fit needs at least two slots");
    VectorX<Scalar> variances(obs.n_sensors());
    for (Index k = 0; k < obs.n_sensors(); ++k)
      variances[k] =
          (obs.data.row(k).array() - est.means[k]).square().sum() / Scalar(n_slots);
    if ((variances.array() <= Scalar(0)).any())
      throw NumericError("local_mle: degenerate node data (zero sample variance)");
    est.variances = std::move(variances);
  }
  return est;
}

/// Global Gaussian MLE. The mean is taken from local_mle so the known-C case
/// coincides with the local fit exactly, not merely numerically.
template <typename Scalar>
GlobalMleT<Scalar> global_mle(const ObservationBlockT<Scalar>& obs,
                              const GaussianMeanModelT<Scalar>& model) {
  if (obs.n_sensors() != model.n_sensors())
    throw std::invalid_argument("global_mle: observation/model dimension mismatch");
  GlobalMleT<Scalar> fit;
  fit.mean = local_mle(obs, true).means;
  if (!model.cov_known) {
    const Index n = obs.n_sensors();
    const Index n_slots = obs.n_slots();
    if (n_slots < n + 1)
      throw std::invalid_argument("global_mle: covariance fit needs L >= N+1 slots");
    const MatrixX<Scalar> centered = obs.data.colwise() - fit.mean;
    MatrixX<Scalar> sample_cov = (centered * centered.transpose()) / Scalar(n_slots);
    Eigen::LLT<MatrixX<Scalar>> llt(sample_cov);
    if (llt.info() != Eigen::Success)
      throw NumericError("global_mle: singular sample covariance");
    fit.covariance = std::move(sample_cov);
  }
  return fit;
}

/// Monte Carlo covariance of the local mean estimates over repeated draws.
/// Validation harness for the asymptotic covariance prediction.
inline Eigen::MatrixXd empirical_estimator_covariance(const GaussianMeanModel& model,
                                                      Hypothesis hypothesis, Index n_slots,
                                                      int n_trials, std::uint64_t seed) {
  if (n_trials < 100)
    throw std::invalid_argument("empirical_estimator_covariance: n_trials must be >= 100");
  const Index n = model.n_sensors();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < n_trials; ++t) {
    const ObservationBlock obs =
        sample_observations(model, hypothesis, n_slots, derive_seed(seed, t));
    const Eigen::VectorXd means = local_mle(obs, true).means;
    sum += means;
    outer.selfadjointView<Eigen::Lower>().rankUpdate(means);
  }
  outer.triangularView<Eigen::StrictlyUpper>() =
      outer.triangularView<Eigen::StrictlyLower>().transpose();
  const Eigen::VectorXd mean = sum / n_trials;
  return outer / n_trials - mean * mean.transpose();
}

}  // namespace ddet
