#include "ddet/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ddet/errors.hpp"

namespace ddet {

namespace {

constexpr double kEigvalDropTol = 1e-12;  // relative to lambda_max
constexpr int kSolverCap = 200;

/// K and its first four derivatives without the public domain check.
struct CgfCore {
  double value, d1, d2, d3, d4;
};

CgfCore cgf_core(const QuadFormDistribution& dist, double s) {
  CgfCore out{0.0, 0.0, 0.0, 0.0, 0.0};
  for (Index i = 0; i < dist.eigvals.size(); ++i) {
    const double lambda = dist.eigvals[i];
    const double lambda2 = lambda * lambda;
    const double delta2 = dist.delta[i] * dist.delta[i];
    const double r = 1.0 - 2.0 * s * lambda;
    const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2;
    out.value += -0.5 * std::log(r) + s * delta2 / r;
    out.d1 += lambda / r + delta2 / r2;
    out.d2 += 2.0 * lambda2 / r2 + 4.0 * lambda * delta2 / r3;
    out.d3 += 8.0 * lambda2 * lambda / r3 + 24.0 * lambda2 * delta2 / r4;
    out.d4 += 48.0 * lambda2 * lambda2 / r4 + 192.0 * lambda2 * lambda * delta2 / (r4 * r);
  }
  return out;
}

/// Saddlepoint density expressed along the saddle: with x = K'(s),
/// f(x) dx = F(s) ds for
///   F(s) = exp(K(s) - s K'(s)) sqrt(K''(s)) (1 + k4/8 - 5 k3^2/24) / sqrt(2 pi),
/// k3/k4 the standardized third and fourth CGF derivatives at s (the usual
/// second-order density factor). For every gamma-family law (central
/// chi-square included) F is exactly proportional to the true density, which
/// is what makes the normalized tail integral below exact for those cases.
double sp_density(const QuadFormDistribution& dist, double s) {
  const CgfCore k = cgf_core(dist, s);
  const double k3 = k.d3 / std::pow(k.d2, 1.5);
  const double k4 = k.d4 / (k.d2 * k.d2);
  const double order2 = 1.0 + k4 / 8.0 - 5.0 * k3 * k3 / 24.0;
  return std::exp(k.value - s * k.d1) * std::sqrt(k.d2) * order2 *
         0.3989422804014326779;
}

/// Exponent of the density along the saddle; decreasing in |s|, peak 0 at s=0.
double sp_log_weight(const QuadFormDistribution& dist, double s) {
  const CgfCore k = cgf_core(dist, s);
  return k.value - s * k.d1;
}

template <typename F>
double simpson_recurse(const F& f, double a, double fa, double b, double fb, double m,
                       double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

/// Integral of the saddlepoint density over saddle parameters [lower, s_sup).
/// `lower` = -infinity when from_minus_inf is set. The far left tail decays
/// only like a power of |s|, so it is integrated in log scale; the upper end
/// is truncated where the exponent has fallen 60 e-folds below its peak.
double sp_density_integral(const QuadFormDistribution& dist, double lower,
                           bool from_minus_inf) {
  const double lambda_max = dist.eigvals[0];
  const double s0 = 1.0 / (2.0 * lambda_max);
  const double s_sup = s0 * (1.0 - 1e-14);

  const double peak = (from_minus_inf || lower <= 0.0) ? 0.0 : sp_log_weight(dist, lower);
  double cut_lo = from_minus_inf ? 0.0 : std::max(lower, 0.0);
  double cut_hi = s_sup;
  if (sp_log_weight(dist, cut_hi) < peak - 60.0) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (cut_lo + cut_hi);
      (sp_log_weight(dist, mid) > peak - 60.0 ? cut_lo : cut_hi) = mid;
    }
  }
  const double s_cut = cut_hi;

  const auto density = [&dist](double s) { return sp_density(dist, s); };
  const double tol = 1e-11;

  double total = 0.0;
  const double right_from = from_minus_inf ? -s0 : std::max(lower, -s0);
  total += adaptive_simpson(density, right_from, s_cut, tol);
  if (from_minus_inf || lower < -s0) {
    // substitute s = -exp(y): ds = -exp(y) dy
    const auto log_density = [&dist](double y) {
      const double s = -std::exp(y);
      return sp_density(dist, s) * std::exp(y);
    };
    const double y_lo = std::log(s0);
    const double y_hi = from_minus_inf ? y_lo + 90.0 : std::log(-lower);
    total += adaptive_simpson(log_density, y_lo, y_hi, tol);
  }
  return total;
}

/// Solves K'(s) = x on (-inf, 1/(2 lambda_max)). K' is strictly increasing
/// from 0+ to +inf on that interval, so a bracket always exists; Newton steps
/// are taken inside it and bisection is the fallback.
double solve_saddlepoint(const QuadFormDistribution& dist, double x) {
  const double lambda_max = dist.eigvals[0];
  const double s_sup = 1.0 / (2.0 * lambda_max);
  double hi = s_sup * (1.0 - 1e-12);
  while (quad_form_cgf(dist, hi).d1 < x) {
    hi = s_sup - 0.5 * (s_sup - hi);
    if (s_sup - hi < 1e-300)
      throw NumericError("saddlepoint: could not bracket from above");
  }
  double lo = 0.0;
  if (quad_form_cgf(dist, 0.0).d1 <= x) {
    lo = 0.0;  // x at or above the mean: saddlepoint is nonnegative
  } else {
    lo = -s_sup;
    int widen = 0;
    while (quad_form_cgf(dist, lo).d1 > x) {
      lo *= 2.0;
      if (++widen > kSolverCap)
        throw NumericError("saddlepoint: could not bracket from below");
    }
  }

  double s = 0.5 * (lo + hi);
  const double tol = 1e-12 * std::max(1.0, x);
  for (int it = 0; it < kSolverCap; ++it) {
    const CgfDerivatives k = quad_form_cgf(dist, s);
    const double resid = k.d1 - x;
    if (std::abs(resid) <= tol) return s;
    if (resid > 0.0)
      hi = s;
    else
      lo = s;
    double next = s - resid / k.d2;  // K'' > 0 on the whole domain
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s) return s;  // interval exhausted at this precision
    s = next;
  }
  throw NumericError("saddlepoint: solver did not converge");
}

}  // namespace

QuadFormDistribution QuadFormDistribution::make(Eigen::VectorXd mu, Eigen::MatrixXd sigma) {
  const Index p = mu.size();
  if (sigma.rows() != p || sigma.cols() != p)
    throw std::invalid_argument("quad form: mu/sigma dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
  if (solver.info() != Eigen::Success)
    throw NumericError("quad form: eigendecomposition failed");

  // SelfAdjointEigenSolver sorts ascending; flip to descending.
  const Eigen::VectorXd evals = solver.eigenvalues().reverse();
  const Eigen::VectorXd rotated = (solver.eigenvectors().transpose() * mu).reverse();

  const double lambda_max = std::max(evals[0], 0.0);
  if (evals[p - 1] < -kEigvalDropTol * std::max(lambda_max, 1.0))
    throw NumericError("quad form: sigma is not positive semidefinite");

  QuadFormDistribution dist;
  dist.mu = std::move(mu);
  dist.sigma = std::move(sigma);
  Index kept = 0;
  while (kept < p && evals[kept] > kEigvalDropTol * lambda_max) ++kept;
  dist.eigvals = evals.head(kept);
  dist.delta = rotated.head(kept);
  dist.offset = rotated.tail(p - kept).squaredNorm();
  return dist;
}

// Written with the same floating-point shapes as quad_form_cgf at s = 0 so
// the moment/CGF identities hold to the last bit.
double QuadFormDistribution::mean() const {
  double m = 0.0;
  for (Index i = 0; i < eigvals.size(); ++i) m += eigvals[i] + delta[i] * delta[i];
  return m + offset;
}

double QuadFormDistribution::variance() const {
  double v = 0.0;
  for (Index i = 0; i < eigvals.size(); ++i) {
    const double delta2 = delta[i] * delta[i];
    v += 2.0 * eigvals[i] * eigvals[i] + 4.0 * eigvals[i] * delta2;
  }
  return v;
}

Eigen::MatrixXd marginal_fisher_tilde(const Eigen::MatrixXd& cov) {
  if ((cov.diagonal().array() <= 0.0).any())
    throw NumericError("marginal_fisher_tilde: nonpositive diagonal");
  const Eigen::ArrayXd inv_diag = cov.diagonal().array().inverse();
  return inv_diag.matrix().asDiagonal() * cov * inv_diag.matrix().asDiagonal();
}

Eigen::VectorXd marginal_fisher_diag(const Eigen::MatrixXd& cov) {
  if ((cov.diagonal().array() <= 0.0).any())
    throw NumericError("marginal_fisher_diag: nonpositive diagonal");
  return cov.diagonal().cwiseInverse();
}

Eigen::MatrixXd local_mle_asymptotic_cov(const Eigen::MatrixXd& i_tilde,
                                         const Eigen::MatrixXd& d_block, int n_slots) {
  if (i_tilde.rows() != d_block.rows() || i_tilde.cols() != d_block.cols())
    throw std::invalid_argument("local_mle_asymptotic_cov: dimension mismatch");
  if (n_slots < 1) throw std::invalid_argument("local_mle_asymptotic_cov: n_slots >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(d_block);
  if (llt.info() != Eigen::Success)
    throw NumericError("local_mle_asymptotic_cov: D is not positive definite");
  // D^{-1} i~ D^{-1} without forming an inverse.
  const Eigen::MatrixXd half = llt.solve(i_tilde);
  return llt.solve(half.transpose()).transpose() / static_cast<double>(n_slots);
}

AsymptoticSpec lmp_asymptotic_spec(const GaussianMeanModel& model, int n_slots) {
  if (n_slots < 1) throw std::invalid_argument("lmp_asymptotic_spec: n_slots >= 1");
  const Eigen::ArrayXd diag = model.cov.diagonal().array();
  if ((diag <= 0.0).any())
    throw NumericError("lmp_asymptotic_spec: nonpositive covariance diagonal");
  const Eigen::VectorXd inv_sqrt_diag = diag.rsqrt().matrix();
  const Eigen::MatrixXd sigma = inv_sqrt_diag.asDiagonal() * model.cov *
                                inv_sqrt_diag.asDiagonal();
  const Eigen::VectorXd mu1 = std::sqrt(static_cast<double>(n_slots)) *
                              inv_sqrt_diag.cwiseProduct(model.theta1 - model.theta0);
  AsymptoticSpec spec{
      QuadFormDistribution::make(Eigen::VectorXd::Zero(model.n_sensors()), sigma),
      QuadFormDistribution::make(mu1, sigma),
      model.cov_known ? StatisticKind::LmpKnownCov : StatisticKind::LmpUnknownCov};
  return spec;
}

AsymptoticSpec glr_asymptotic_spec(const GaussianMeanModel& model, int n_slots) {
  if (n_slots < 1) throw std::invalid_argument("glr_asymptotic_spec: n_slots >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(model.cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("glr_asymptotic_spec: covariance is not SPD");
  const Eigen::MatrixXd identity =
      Eigen::MatrixXd::Identity(model.n_sensors(), model.n_sensors());
  const Eigen::VectorXd mu1 =
      std::sqrt(static_cast<double>(n_slots)) *
      llt.matrixL().solve(Eigen::VectorXd(model.theta1 - model.theta0));
  AsymptoticSpec spec{
      QuadFormDistribution::make(Eigen::VectorXd::Zero(model.n_sensors()), identity),
      QuadFormDistribution::make(mu1, identity),
      model.cov_known ? StatisticKind::GlrKnownCov : StatisticKind::GlrUnknownCov};
  return spec;
}

CgfDerivatives quad_form_cgf(const QuadFormDistribution& dist, double s) {
  const Index p = dist.eigvals.size();
  if (p == 0) return {0.0, 0.0, 0.0};
  const double lambda_max = dist.eigvals[0];
  if (!(s < 1.0 / (2.0 * lambda_max)))
    throw std::invalid_argument("quad_form_cgf: s outside the CGF domain");
  const CgfCore core = cgf_core(dist, s);
  return {core.value, core.d1, core.d2};
}

double saddlepoint_ccdf(const QuadFormDistribution& dist, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("saddlepoint_ccdf: x must be > 0");
  // Mass in null eigendirections only shifts the law.
  const double shifted = x - dist.offset;
  if (dist.eigvals.size() == 0) return shifted < 0.0 ? 1.0 : 0.0;
  if (shifted <= 0.0) return 1.0;

  // Normalized saddlepoint evaluation: P(Q > x) is the saddlepoint density
  // integrated above the saddlepoint of x, divided by its total mass. Unlike
  // the bare tail formula this keeps its accuracy at small P, and it is exact
  // whenever the law is in the gamma family (any central chi-square).
  const double s_hat = solve_saddlepoint(dist, shifted);
  const double tail = sp_density_integral(dist, s_hat, false);
  const double mass = sp_density_integral(dist, 0.0, true);
  return std::clamp(tail / mass, 0.0, 1.0);
}

double threshold_for_ccdf(const QuadFormDistribution& dist, double tail_prob) {
  if (!(tail_prob > 0.0 && tail_prob < 1.0))
    throw std::invalid_argument("threshold_for_ccdf: tail_prob in (0,1) required");
  double lo = std::numeric_limits<double>::min();
  double hi = dist.mean() + 2.0 * std::sqrt(dist.variance()) + 1.0;
  while (saddlepoint_ccdf(dist, hi) > tail_prob) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (saddlepoint_ccdf(dist, mid) > tail_prob)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

double deflection_glr(const GaussianMeanModel& model, int n_slots) {
  Eigen::LLT<Eigen::MatrixXd> llt(model.cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("deflection_glr: covariance is not SPD");
  const Eigen::VectorXd whitened =
      llt.matrixL().solve(Eigen::VectorXd(model.theta1 - model.theta0));
  const double shift = n_slots * whitened.squaredNorm();
  return shift * shift / (2.0 * static_cast<double>(model.n_sensors()));
}

double deflection_lmp(const GaussianMeanModel& model, int n_slots) {
  const Eigen::ArrayXd diag = model.cov.diagonal().array();
  if ((diag <= 0.0).any())
    throw NumericError("deflection_lmp: nonpositive covariance diagonal");
  const Eigen::VectorXd shift_vec = model.theta1 - model.theta0;
  const double shift = n_slots * (shift_vec.array().square() / diag).sum();
  const Eigen::MatrixXd normalized = model.cov * diag.inverse().matrix().asDiagonal();
  const double trace_sq = (normalized * normalized).trace();
  return shift * shift / (2.0 * trace_sq);
}

std::vector<std::pair<double, double>> croc_theoretical(const AsymptoticSpec& spec,
                                                        const std::vector<double>& gammas) {
  if (!std::is_sorted(gammas.begin(), gammas.end()))
    throw std::invalid_argument("croc_theoretical: gammas must be sorted ascending");
  std::vector<std::pair<double, double>> curve;
  curve.reserve(gammas.size());
  for (const double gamma : gammas) {
    if (gamma <= 0.0) {
      curve.emplace_back(1.0, 0.0);  // statistics are nonnegative
      continue;
    }
    const double pfa = std::clamp(saddlepoint_ccdf(spec.dist_h0, gamma), 0.0, 1.0);
    const double pmd = std::clamp(1.0 - saddlepoint_ccdf(spec.dist_h1, gamma), 0.0, 1.0);
    curve.emplace_back(pfa, pmd);
  }
  return curve;
}

}  // namespace ddet
