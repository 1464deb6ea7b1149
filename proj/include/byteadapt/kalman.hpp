#pragma once

#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "byteadapt/geometry.hpp"

namespace byteadapt {

/// Process/measurement noise scaling. Standard deviations are proportional
/// to the box height, so large boxes tolerate proportionally more motion.
/// The aspect component gets small fixed deviations instead (it barely
/// changes frame to frame and is not height-scaled).
struct KalmanParams {
  double position_weight = 1.0 / 20.0;   ///< std multiplier for (cx, cy, h)
  double velocity_weight = 1.0 / 160.0;  ///< std multiplier for their rates
};

/// Gaussian state over [cx, cy, aspect, h, vcx, vcy, vaspect, vh] under a
/// constant-velocity model with unit frame steps.
struct KalmanState {
  Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> covariance = Eigen::Matrix<double, 8, 8>::Zero();
};

namespace detail {

inline Eigen::Matrix<double, 8, 8> motion_matrix() {
  Eigen::Matrix<double, 8, 8> f = Eigen::Matrix<double, 8, 8>::Identity();
  for (int i = 0; i < 4; ++i) {
    f(i, i + 4) = 1.0;
  }
  return f;
}

inline void symmetrize(Eigen::Matrix<double, 8, 8>& p) {
  p = ((p + p.transpose()) / 2.0).eval();
}

inline void check_measurement(const StateVec4& z) {
  if (z[3] <= 0.0) {
    throw std::invalid_argument("kalman: measurement height <= 0");
  }
  if (z[2] <= 0.0) {
    throw std::invalid_argument("kalman: measurement aspect <= 0");
  }
}

}  // namespace detail

/// New track state from a first measurement: zero velocity, diagonal
/// covariance with generous stds (2*wp*h on position, 10*wv*h on velocity).
inline KalmanState initiate(const StateVec4& measurement,
                            const KalmanParams& params = {}) {
  detail::check_measurement(measurement);
  const double h = measurement[3];
  KalmanState s;
  for (int i = 0; i < 4; ++i) {
    s.mean(i) = measurement[static_cast<std::size_t>(i)];
  }
  const double wp = params.position_weight;
  const double wv = params.velocity_weight;
  const double std[8] = {2 * wp * h, 2 * wp * h, 1e-2, 2 * wp * h,
                         10 * wv * h, 10 * wv * h, 1e-5, 10 * wv * h};
  for (int i = 0; i < 8; ++i) {
    s.covariance(i, i) = std[i] * std[i];
  }
  return s;
}

/// One constant-velocity step: x <- F x, P <- F P F^T + Q with Q built from
/// the current height estimate.
inline KalmanState predict(const KalmanState& state,
                           const KalmanParams& params = {}) {
  const auto f = detail::motion_matrix();
  const double h = state.mean(3);
  const double wp = params.position_weight;
  const double wv = params.velocity_weight;
  const double std[8] = {wp * h, wp * h, 1e-2, wp * h,
                         wv * h, wv * h, 1e-5, wv * h};
  Eigen::Matrix<double, 8, 8> q = Eigen::Matrix<double, 8, 8>::Zero();
  for (int i = 0; i < 8; ++i) {
    q(i, i) = std[i] * std[i];
  }
  KalmanState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + q;
  detail::symmetrize(out.covariance);
  return out;
}

/// Measurement update with z = (cx, cy, aspect, h). Measurement noise R is
/// diagonal, stds (wp*h, wp*h, 1e-1, wp*h) from the prior's height.
/// Throws std::invalid_argument on a degenerate measurement and
/// std::runtime_error if the innovation covariance is not positive definite.
inline KalmanState update(const KalmanState& state, const StateVec4& measurement,
                          const KalmanParams& params = {}) {
  detail::check_measurement(measurement);
  using Mat48 = Eigen::Matrix<double, 4, 8>;
  Mat48 hmat = Mat48::Zero();
  for (int i = 0; i < 4; ++i) {
    hmat(i, i) = 1.0;
  }

  const double h = state.mean(3);
  const double wp = params.position_weight;
  const double rstd[4] = {wp * h, wp * h, 1e-1, wp * h};
  Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i) {
    r(i, i) = rstd[i] * rstd[i];
  }

  const Eigen::Matrix4d s_innov =
      hmat * state.covariance * hmat.transpose() + r;
  Eigen::LLT<Eigen::Matrix4d> llt(s_innov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("kalman: innovation covariance not positive definite");
  }

  Eigen::Vector4d z;
  for (int i = 0; i < 4; ++i) {
    z(i) = measurement[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector4d innovation = z - hmat * state.mean;
  // Gain K = P H^T S^-1 via the Cholesky factor of S.
  const Eigen::Matrix<double, 8, 4> k =
      llt.solve(hmat * state.covariance).transpose();

  KalmanState out;
  out.mean = state.mean + k * innovation;
  out.covariance =
      (Eigen::Matrix<double, 8, 8>::Identity() - k * hmat) * state.covariance;
  detail::symmetrize(out.covariance);
  return out;
}

}  // namespace byteadapt
