#include <doctest.h>

#include "ddet/estimators.hpp"

using namespace ddet;

TEST_CASE("local_mle: all-zero data fits zero means") {
  const ObservationBlock obs{Eigen::MatrixXd::Zero(3, 5)};
  const LocalEstimates est = local_mle(obs, true);
  CHECK(est.means == Eigen::VectorXd::Zero(3));
  CHECK_FALSE(est.variances.has_value());
}

TEST_CASE("local_mle: row [1,2,3] has mean 2 and MLE variance 2/3") {
  Eigen::MatrixXd data(1, 3);
  data << 1.0, 2.0, 3.0;
  const LocalEstimates est = local_mle(ObservationBlock{data}, false);
  CHECK(est.means[0] == doctest::Approx(2.0).epsilon(1e-15));
  REQUIRE(est.variances.has_value());
  CHECK((*est.variances)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("local_mle is consistent: means approach theta1 at large L") {
  const GaussianMeanModel model =
      make_toeplitz_model(0.3, Eigen::VectorXd::Constant(10, 0.3), true);
  const ObservationBlock obs = sample_observations(model, Hypothesis::H1, 10000, 31);
  const LocalEstimates est = local_mle(obs, true);
  CHECK((est.means - model.theta1).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("local_mle preconditions and degenerate data") {
  Eigen::MatrixXd one_col = Eigen::MatrixXd::Ones(2, 1);
  CHECK_NOTHROW(local_mle(ObservationBlock{one_col}, true));
  CHECK_THROWS_AS(local_mle(ObservationBlock{one_col}, false), std::invalid_argument);
  Eigen::MatrixXd constant_rows = Eigen::MatrixXd::Ones(2, 4);
  CHECK_THROWS_AS(local_mle(ObservationBlock{constant_rows}, false), NumericError);
}

TEST_CASE("global_mle: known covariance reproduces the local means bitwise") {
  const GaussianMeanModel model =
      make_toeplitz_model(0.5, Eigen::VectorXd::Constant(4, 0.3), true);
  const ObservationBlock obs = sample_observations(model, Hypothesis::H1, 33, 5);
  const GlobalMle fit = global_mle(obs, model);
  CHECK(fit.mean == local_mle(obs, true).means);
  CHECK_FALSE(fit.covariance.has_value());
}

TEST_CASE("global_mle: a single column is its own mean") {
  const GaussianMeanModel model =
      make_toeplitz_model(0.0, Eigen::VectorXd::Constant(3, 1.0), true);
  Eigen::MatrixXd data(3, 1);
  data << 0.3, -1.2, 4.0;
  const GlobalMle fit = global_mle(ObservationBlock{data}, model);
  CHECK(fit.mean == data.col(0));
}

TEST_CASE("global_mle: sample covariance converges and enforces L >= N+1") {
  const GaussianMeanModel model =
      make_toeplitz_model(0.3, Eigen::VectorXd::Constant(5, 0.3), false);
  const ObservationBlock obs = sample_observations(model, Hypothesis::H0, 10000, 13);
  const GlobalMle fit = global_mle(obs, model);
  REQUIRE(fit.covariance.has_value());
  CHECK((*fit.covariance - model.cov).cwiseAbs().maxCoeff() < 0.05);
  const ObservationBlock tiny = sample_observations(model, Hypothesis::H0, 5, 13);
  CHECK_THROWS_AS(global_mle(tiny, model), std::invalid_argument);
}

TEST_CASE("shift equivariance: adding c to every sample adds c to every mean") {
  const GaussianMeanModel model =
      make_toeplitz_model(0.3, Eigen::VectorXd::Constant(4, 0.3), true);
  const ObservationBlock obs = sample_observations(model, Hypothesis::H1, 20, 77);
  const LocalEstimates base = local_mle(obs, false);
  ObservationBlock shifted{obs.data.array() + 3.25};
  const LocalEstimates moved = local_mle(shifted, false);
  CHECK((moved.means - (base.means.array() + 3.25).matrix()).cwiseAbs().maxCoeff() <
        1e-12);
  // Variances are invariant to the shift.
  CHECK((*moved.variances - *base.variances).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empirical estimator covariance: iid case gives C/L = I/L") {
  const GaussianMeanModel model = make_gaussian_mean_model(
      Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(4, 0.3),
      Eigen::MatrixXd::Identity(4, 4), true);
  const int n_slots = 20;
  const Eigen::MatrixXd emp =
      empirical_estimator_covariance(model, Hypothesis::H0, n_slots, 20000, 101);
  for (int i = 0; i < 4; ++i)
    CHECK(emp(i, i) == doctest::Approx(1.0 / n_slots).epsilon(0.05));
  CHECK_THROWS_AS(empirical_estimator_covariance(model, Hypothesis::H0, 20, 50, 1),
                  std::invalid_argument);
}
