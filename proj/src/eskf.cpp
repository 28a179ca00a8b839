#include "insp/eskf.hpp"

#include <cmath>
#include <stdexcept>

namespace insp {

namespace {
constexpr double kGravityVecZ = -kGravity;

void symmetrize(Eigen::Matrix<double, 15, 15>& P) {
  P = 0.5 * (P + P.transpose()).eval();
}
}  // namespace

Eskf::Eskf(const EskfParams& params) : params_(params) {}

void Eskf::initialize(const Vec3& position, double yaw, double timestamp) {
  state_ = NavState();
  state_.position = position;
  state_.orientation = quat_from_yaw(yaw);
  state_.timestamp = timestamp;

  auto& P = state_.covariance;
  P.setZero();
  P.block<3, 3>(0, 0) = Mat3::Identity() * params_.init_pos_std * params_.init_pos_std;
  P.block<3, 3>(3, 3) = Mat3::Identity() * params_.init_vel_std * params_.init_vel_std;
  P(6, 6) = P(7, 7) = params_.init_att_std * params_.init_att_std;
  P(8, 8) = params_.init_yaw_std * params_.init_yaw_std;
  P.block<3, 3>(9, 9) = Mat3::Identity() * params_.init_accel_bias_std * params_.init_accel_bias_std;
  P.block<3, 3>(12, 12) = Mat3::Identity() * params_.init_gyro_bias_std * params_.init_gyro_bias_std;

  history_.clear();
  rejected_ = 0;
}

void Eskf::propagate_state(NavState& state, const ImuSample& imu, double dt,
                           const EskfParams& params) {
  if (!(dt > 0.0) || dt > 0.1) throw std::invalid_argument("eskf: dt must be in (0, 0.1]");
  if (!imu.specific_force.allFinite() || !imu.angular_rate.allFinite()) {
    throw std::invalid_argument("eskf: non-finite IMU sample");
  }

  const Vec3 f = imu.specific_force - state.accel_bias;
  const Vec3 w = imu.angular_rate - state.gyro_bias;
  const Mat3 R = state.orientation.toRotationMatrix();
  const Vec3 accel_world = R * f + Vec3(0.0, 0.0, kGravityVecZ);

  state.position += state.velocity * dt + 0.5 * accel_world * dt * dt;
  state.velocity += accel_world * dt;
  state.orientation = (state.orientation * quat_exp(w * dt)).normalized();
  state.timestamp = imu.timestamp;

  Eigen::Matrix<double, 15, 15> F = Eigen::Matrix<double, 15, 15>::Identity();
  F.block<3, 3>(0, 3) = Mat3::Identity() * dt;
  F.block<3, 3>(3, 6) = -R * skew(f) * dt;
  F.block<3, 3>(3, 9) = -R * dt;
  F.block<3, 3>(6, 6) = Mat3::Identity() - skew(w) * dt;
  F.block<3, 3>(6, 12) = -Mat3::Identity() * dt;

  Eigen::Matrix<double, 15, 15> Q = Eigen::Matrix<double, 15, 15>::Zero();
  const double qv = params.accel_noise_density * params.accel_noise_density * dt;
  const double qt = params.gyro_noise_density * params.gyro_noise_density * dt;
  const double qba = params.accel_bias_rw_density * params.accel_bias_rw_density * dt;
  const double qbg = params.gyro_bias_rw_density * params.gyro_bias_rw_density * dt;
  Q.block<3, 3>(3, 3) = Mat3::Identity() * qv;
  Q.block<3, 3>(6, 6) = Mat3::Identity() * qt;
  Q.block<3, 3>(9, 9) = Mat3::Identity() * qba;
  Q.block<3, 3>(12, 12) = Mat3::Identity() * qbg;

  state.covariance = (F * state.covariance * F.transpose() + Q).eval();
  symmetrize(state.covariance);
}

void Eskf::propagate(const ImuSample& imu, double dt) {
  propagate_state(state_, imu, dt, params_);

  history_.push_back({imu, dt, state_});
  const double horizon = params_.buffer_horizon;
  while (!history_.empty() && history_.front().post.timestamp < state_.timestamp - horizon) {
    history_.pop_front();
  }
}

Eigen::Matrix<double, 1, 15> Eskf::range_jacobian(const NavState& state, const Vec3& anchor) {
  Eigen::Matrix<double, 1, 15> H = Eigen::Matrix<double, 1, 15>::Zero();
  const Vec3 diff = state.position - anchor;
  const double dist = diff.norm();
  H.block<1, 3>(0, 0) = (diff / dist).transpose();
  return H;
}

UpdateStatus Eskf::apply_scalar_update(NavState& state, double innovation,
                                       const Eigen::Matrix<double, 1, 15>& H, double noise_var,
                                       double gate, int* rejected) {
  const double S = (H * state.covariance * H.transpose())(0, 0) + noise_var;
  if (innovation * innovation > gate * gate * S) {
    if (rejected != nullptr) ++(*rejected);
    return UpdateStatus::rejected_gate;
  }

  const Eigen::Matrix<double, 15, 1> K = state.covariance * H.transpose() / S;
  const Eigen::Matrix<double, 15, 1> dx = K * innovation;

  state.position += dx.segment<3>(0);
  state.velocity += dx.segment<3>(3);
  state.orientation = (state.orientation * quat_exp(dx.segment<3>(6))).normalized();
  state.accel_bias += dx.segment<3>(9);
  state.gyro_bias += dx.segment<3>(12);

  const Eigen::Matrix<double, 15, 15> IKH = Eigen::Matrix<double, 15, 15>::Identity() - K * H;
  state.covariance =
      (IKH * state.covariance * IKH.transpose() + K * noise_var * K.transpose()).eval();
  symmetrize(state.covariance);
  return UpdateStatus::applied;
}

UpdateStatus Eskf::apply_range_update(NavState& state, const RangeMeasurement& meas,
                                      const AnchorSet& anchors, const EskfParams& params,
                                      int* rejected) {
  const Anchor& anchor = anchors.by_id(meas.anchor_id);
  const Vec3 diff = state.position - anchor.position;
  const double dist = diff.norm();
  if (dist < 1e-9) return UpdateStatus::skipped_singular;

  const Eigen::Matrix<double, 1, 15> H = range_jacobian(state, anchor.position);
  const double innovation = meas.range - dist;
  return apply_scalar_update(state, innovation, H, params.range_noise_std * params.range_noise_std,
                             params.innovation_gate, rejected);
}

UpdateStatus Eskf::update_range(const RangeMeasurement& meas, const AnchorSet& anchors) {
  return apply_range_update(state_, meas, anchors, params_, &rejected_);
}

UpdateStatus Eskf::process_range(const RangeMeasurement& meas, const AnchorSet& anchors) {
  if (history_.empty() || meas.timestamp >= state_.timestamp) {
    return update_range(meas, anchors);
  }
  if (meas.timestamp < history_.front().post.timestamp - 1e-9) {
    ++rejected_;
    return UpdateStatus::rejected_stale;
  }

  // buffered state nearest the measurement time
  std::size_t best = 0;
  double best_dt = std::abs(history_[0].post.timestamp - meas.timestamp);
  for (std::size_t i = 1; i < history_.size(); ++i) {
    const double d = std::abs(history_[i].post.timestamp - meas.timestamp);
    if (d < best_dt) {
      best_dt = d;
      best = i;
    }
  }

  const UpdateStatus status =
      apply_range_update(history_[best].post, meas, anchors, params_, &rejected_);

  // replay propagation to the present
  for (std::size_t i = best + 1; i < history_.size(); ++i) {
    NavState st = history_[i - 1].post;
    propagate_state(st, history_[i].imu, history_[i].dt, params_);
    history_[i].post = st;
  }
  state_ = history_.back().post;
  return status;
}

UpdateStatus Eskf::update_heading(double yaw_measured) {
  const Mat3 R = state_.orientation.toRotationMatrix();
  const Vec3 fwd = R.col(0);
  const double den = fwd.x() * fwd.x() + fwd.y() * fwd.y();
  if (den < 1e-12) return UpdateStatus::skipped_singular;  // gimbal-lock-ish pose

  const double yaw_pred = std::atan2(fwd.y(), fwd.x());
  Eigen::Matrix<double, 1, 3> dyaw_df;
  dyaw_df << -fwd.y() / den, fwd.x() / den, 0.0;

  Eigen::Matrix<double, 1, 15> H = Eigen::Matrix<double, 1, 15>::Zero();
  H.block<1, 3>(0, 6) = dyaw_df * (-R * skew(Vec3::UnitX()));

  const double innovation = angle_diff(yaw_measured, yaw_pred);
  return apply_scalar_update(state_, innovation, H,
                             params_.heading_noise_std * params_.heading_noise_std,
                             params_.innovation_gate, &rejected_);
}

std::vector<NavState> run_estimator(Eskf& filter, const std::vector<ImuSample>& imu_stream,
                                    const std::vector<RangeMeasurement>& range_stream,
                                    const AnchorSet& anchors) {
  std::vector<NavState> out;
  out.reserve(imu_stream.size());
  std::size_t next_range = 0;
  double prev_t = filter.state().timestamp;
  for (const ImuSample& imu : imu_stream) {
    const double dt = imu.timestamp - prev_t;
    prev_t = imu.timestamp;
    filter.propagate(imu, dt);
    while (next_range < range_stream.size() &&
           range_stream[next_range].timestamp + range_stream[next_range].latency <=
               imu.timestamp + 1e-12) {
      filter.process_range(range_stream[next_range], anchors);
      ++next_range;
    }
    out.push_back(filter.state());
  }
  return out;
}

}  // namespace insp
