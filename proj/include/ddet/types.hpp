#pragma once

#include <Eigen/Dense>

namespace ddet {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Hypothesis { H0, H1 };

/// The four detection statistics shipped: centralized GLR and the
/// marginal-product statistic, each with known or estimated covariance.
enum class StatisticKind { GlrKnownCov, GlrUnknownCov, LmpKnownCov, LmpUnknownCov };

inline const char* to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::GlrKnownCov: return "glr_known";
    case StatisticKind::GlrUnknownCov: return "glr_unknown";
    case StatisticKind::LmpKnownCov: return "lmp_known";
    case StatisticKind::LmpUnknownCov: return "lmp_unknown";
  }
  return "invalid";
}

inline bool is_lmp(StatisticKind kind) {
  return kind == StatisticKind::LmpKnownCov || kind == StatisticKind::LmpUnknownCov;
}

inline bool is_known_cov(StatisticKind kind) {
  return kind == StatisticKind::GlrKnownCov || kind == StatisticKind::LmpKnownCov;
}

}  // namespace ddet
