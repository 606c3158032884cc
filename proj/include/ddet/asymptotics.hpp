#pragma once

#include <utility>
#include <vector>

#include "ddet/model.hpp"
#include "ddet/types.hpp"

namespace ddet {

/// Law of ||n||^2 for n ~ N(mu, Sigma) in P dimensions (generalized,
/// possibly noncentral, chi-square). Reduced at construction to the
/// eigenbasis of Sigma: Q = sum_i lambda_i (g_i + delta_i/sqrt(lambda_i))^2
/// + offset, with g_i iid standard normal. Eigenvalues below
/// 1e-12 * lambda_max are treated as exact zeros; the mean mass they carry
/// has no variance and becomes the additive `offset`.
struct QuadFormDistribution {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd eigvals;  // descending, strictly positive
  Eigen::VectorXd delta;    // rotated mean U' mu, entries matching eigvals
  double offset = 0.0;      // squared mean mass in the null eigendirections

  static QuadFormDistribution make(Eigen::VectorXd mu, Eigen::MatrixXd sigma);

  double mean() const;
  double variance() const;
};

/// H0/H1 laws of one statistic's 2 log T in the large-L regime.
struct AsymptoticSpec {
  QuadFormDistribution dist_h0;
  QuadFormDistribution dist_h1;
  StatisticKind kind;
};

/// Marginal Fisher information of the per-node score vector for the Gaussian
/// mean parameters: diag(C)^{-1} C diag(C)^{-1}.
Eigen::MatrixXd marginal_fisher_tilde(const Eigen::MatrixXd& cov);

/// Its diagonal, diag(C)^{-1}, returned as a vector.
Eigen::VectorXd marginal_fisher_diag(const Eigen::MatrixXd& cov);

/// Asymptotic covariance of the local MLE: (1/L) D^{-1} i~ D^{-1}.
Eigen::MatrixXd local_mle_asymptotic_cov(const Eigen::MatrixXd& i_tilde,
                                         const Eigen::MatrixXd& d_block, int n_slots);

/// Marginal-product statistic: H0 law centered, H1 mean sqrt(L) D^{1/2}
/// (theta1 - theta0), shared shape diag(C)^{-1/2} C diag(C)^{-1/2}.
/// Also serves the unknown-covariance regime: the added per-node variance
/// parameters leave the mean-block information, and hence the law, unchanged.
AsymptoticSpec lmp_asymptotic_spec(const GaussianMeanModel& model, int n_slots);

/// GLR: central chi-square with N degrees of freedom under H0; under H1 the
/// identity-shape law shifted by sqrt(L) C^{-1/2} (theta1 - theta0).
AsymptoticSpec glr_asymptotic_spec(const GaussianMeanModel& model, int n_slots);

struct CgfDerivatives {
  double value;  // K(s)
  double d1;     // K'(s)
  double d2;     // K''(s)
};

/// Cumulant generating function of Q - offset at s < 1/(2 lambda_max):
/// K(s) = sum_i [ -log(1 - 2 s lambda_i)/2 + s delta_i^2 / (1 - 2 s lambda_i) ]
/// with exact first and second derivatives.
CgfDerivatives quad_form_cgf(const QuadFormDistribution& dist, double s);

/// P(Q > x) by the Lugannani-Rice saddlepoint approximation. The saddlepoint
/// K'(s) = x is found by bisection-safeguarded Newton; near the mean the
/// formula's removable singularity is replaced by its analytic limit.
double saddlepoint_ccdf(const QuadFormDistribution& dist, double x);

/// Smallest gamma with P(Q > gamma) <= tail_prob, by bisection on the CCDF.
double threshold_for_ccdf(const QuadFormDistribution& dist, double tail_prob);

/// Deflection coefficients (E1[T] - E0[T])^2 / Var0[T] of the two statistics
/// in the known-covariance Gaussian case.
double deflection_glr(const GaussianMeanModel& model, int n_slots);
double deflection_lmp(const GaussianMeanModel& model, int n_slots);

/// (P_FA, P_MD) per threshold: P_FA = ccdf_H0(gamma), P_MD = 1 - ccdf_H1(gamma).
/// Gammas must be sorted ascending; probabilities are clamped to [0, 1].
std::vector<std::pair<double, double>> croc_theoretical(const AsymptoticSpec& spec,
                                                        const std::vector<double>& gammas);

}  // namespace ddet
