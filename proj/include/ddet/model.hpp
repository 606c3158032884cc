#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "ddet/errors.hpp"
#include "ddet/rng.hpp"
#include "ddet/types.hpp"

namespace ddet {

/// Gaussian mean-shift hypothesis pair: mean theta0 under H0, theta1 under H1,
/// shared covariance. theta1 is consumed by the sampler and the asymptotic /
/// deflection predictions only; detector functions take the null parameters
/// explicitly and never see it.
template <typename Scalar>
struct GaussianMeanModelT {
  VectorX<Scalar> theta0;
  VectorX<Scalar> theta1;
  MatrixX<Scalar> cov;
  bool cov_known = true;

  Index n_sensors() const { return theta0.size(); }
};
using GaussianMeanModel = GaussianMeanModelT<double>;

/// N x L sample matrix; column l holds the readings of all N sensors at slot l.
template <typename Scalar>
struct ObservationBlockT {
  MatrixX<Scalar> data;

  Index n_sensors() const { return data.rows(); }
  Index n_slots() const { return data.cols(); }
};
using ObservationBlock = ObservationBlockT<double>;

/// Covariance controlled by a single correlation parameter:
/// C(i,j) = rho^|i-j|. Symmetric by construction, SPD for |rho| < 1.
template <typename Scalar>
MatrixX<Scalar> build_toeplitz_cov(Scalar rho, Index n) {
  if (!(std::abs(rho) < Scalar(1)))
    throw std::invalid_argument("build_toeplitz_cov: |rho| must be < 1");
  if (n < 1) throw std::invalid_argument("build_toeplitz_cov: n must be >= 1");
  VectorX<Scalar> powers(n);
  powers[0] = Scalar(1);
  for (Index k = 1; k < n; ++k) powers[k] = powers[k - 1] * rho;
  MatrixX<Scalar> cov(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) cov(i, j) = cov(j, i) = powers[j - i];
  return cov;
}

/// Validating constructor. Rejects shape mismatches and asymmetric matrices
/// (relative tolerance 1e-12); requires a successful Cholesky factorization.
template <typename D0, typename D1, typename DC>
GaussianMeanModelT<typename D0::Scalar> make_gaussian_mean_model(
    const Eigen::MatrixBase<D0>& theta0, const Eigen::MatrixBase<D1>& theta1,
    const Eigen::MatrixBase<DC>& cov, bool cov_known) {
  using Scalar = typename D0::Scalar;
  GaussianMeanModelT<Scalar> model;
  model.theta0 = theta0;
  model.theta1 = theta1;
  model.cov = cov;
  model.cov_known = cov_known;
  const Index n = model.theta0.size();
  if (n < 1) throw std::invalid_argument("model: need at least one sensor");
  if (model.theta1.size() != n)
    throw std::invalid_argument("model: theta0 and theta1 must have equal length");
  if (model.cov.rows() != n || model.cov.cols() != n)
    throw std::invalid_argument("model: covariance shape must be n_sensors x n_sensors");
  const Scalar scale = model.cov.cwiseAbs().maxCoeff();
  const Scalar asym = (model.cov - model.cov.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= Scalar(1e-12) * scale))
    throw std::invalid_argument("model: covariance is not symmetric (rel. tol 1e-12)");
  Eigen::LLT<MatrixX<Scalar>> llt(model.cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("model: covariance has no Cholesky factorization (not SPD)");
  return model;
}

/// Paper-style instance: theta0 = 0, Toeplitz covariance from rho.
template <typename Derived>
GaussianMeanModelT<typename Derived::Scalar> make_toeplitz_model(
    typename Derived::Scalar rho, const Eigen::MatrixBase<Derived>& theta1,
    bool cov_known) {
  using Scalar = typename Derived::Scalar;
  const Index n = theta1.size();
  return make_gaussian_mean_model(VectorX<Scalar>::Zero(n), theta1,
                                  build_toeplitz_cov(rho, n), cov_known);
}

/// Validates externally supplied sample data (finite entries, nonempty).
template <typename Derived>
ObservationBlockT<typename Derived::Scalar> make_observation_block(
    const Eigen::MatrixBase<Derived>& data) {
  ObservationBlockT<typename Derived::Scalar> block{data};
  if (block.data.rows() < 1 || block.data.cols() < 1)
    throw std::invalid_argument("observation block: empty sample matrix");
  if (!block.data.allFinite())
    throw std::invalid_argument("observation block: non-finite entry");
  return block;
}

/// Draws L iid columns from N(theta_i, C) as theta_i + G u, with G the lower
/// Cholesky factor of C and u standard normal. Identical inputs (model,
/// hypothesis, L, seed) produce bit-identical output.
template <typename Scalar>
ObservationBlockT<Scalar> sample_observations(const GaussianMeanModelT<Scalar>& model,
                                              Hypothesis hypothesis, Index n_slots,
                                              std::uint64_t seed) {
  if (n_slots < 1) throw std::invalid_argument("sample_observations: n_slots must be >= 1");
  Eigen::LLT<MatrixX<Scalar>> llt(model.cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("sample_observations: covariance is not SPD");
  const MatrixX<Scalar> chol_lower = llt.matrixL();
  const VectorX<Scalar>& mean =
      hypothesis == Hypothesis::H1 ? model.theta1 : model.theta0;
  const Index n = model.n_sensors();
  Pcg32 rng(seed);
  MatrixX<Scalar> data(n, n_slots);
  VectorX<Scalar> u(n);
  for (Index l = 0; l < n_slots; ++l) {
    for (Index k = 0; k < n; ++k) u[k] = static_cast<Scalar>(rng.next_normal());
    data.col(l) = mean + chol_lower * u;
  }
  return ObservationBlockT<Scalar>{std::move(data)};
}

/// Number of locally observable parameters: one mean per node, plus one
/// variance per node when the covariance must be estimated.
template <typename Scalar>
Index local_parameter_dim(const GaussianMeanModelT<Scalar>& model) {
  return model.cov_known ? model.n_sensors() : 2 * model.n_sensors();
}

}  // namespace ddet
