#include "insp/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace insp {

void ControllerParams::validate() const {
  if (!(position_weight > 0.0) || !(velocity_weight >= 0.0) || !(jerk_weight > 0.0)) {
    throw std::invalid_argument("controller: weights must be positive");
  }
  if (!(horizon > 0.0) || !(t_s > 0.0) || horizon < t_s) {
    throw std::invalid_argument("controller: horizon must cover at least one step");
  }
  if (!(max_tilt_deg > 0.0 && max_tilt_deg < 90.0)) {
    throw std::invalid_argument("controller: max tilt must be in (0, 90) degrees");
  }
}

PositionController::PositionController(const ControllerParams& params, const MavParams& vehicle)
    : params_(params), vehicle_(vehicle) {
  params_.validate();
  vehicle_.validate();

  const double dt = params_.t_s;
  Eigen::Matrix3d A;
  A << 1, dt, dt * dt / 2.0, 0, 1, dt, 0, 0, 1;
  Eigen::Vector3d B(dt * dt * dt / 6.0, dt * dt / 2.0, dt);
  Eigen::Matrix3d Q = Eigen::Matrix3d::Zero();
  Q(0, 0) = params_.position_weight;
  Q(1, 1) = params_.velocity_weight;
  const double R = params_.jerk_weight;

  const int steps = static_cast<int>(std::round(params_.horizon / dt));
  Eigen::Matrix3d P = Q;
  Eigen::RowVector3d K = Eigen::RowVector3d::Zero();
  for (int i = 0; i < steps; ++i) {
    const double denom = R + (B.transpose() * P * B)(0, 0);
    K = (B.transpose() * P * A) / denom;
    P = Q + A.transpose() * P * (A - B * K);
    P = 0.5 * (P + P.transpose()).eval();
  }
  gain_ = K;
}

void PositionController::reset() { accel_cmd_ = Vec3::Zero(); }

ControlCommand PositionController::command(const Vec3& est_position, const Vec3& est_velocity,
                                           const PositionReference& ref) {
  if (!est_position.allFinite() || !est_velocity.allFinite()) {
    throw std::invalid_argument("controller: non-finite estimate");
  }

  for (int axis = 0; axis < 3; ++axis) {
    const Eigen::Vector3d err(est_position[axis] - ref.position[axis],
                              est_velocity[axis] - ref.velocity[axis],
                              accel_cmd_[axis] - ref.acceleration[axis]);
    const double jerk = -(gain_ * err)(0, 0);
    accel_cmd_[axis] += jerk * params_.t_s;
  }

  ControlCommand cmd;

  // desired specific force (thrust direction * magnitude / mass)
  Vec3 force = vehicle_.mass * (accel_cmd_ + Vec3(0.0, 0.0, kGravity));

  // tilt saturation: limit the angle between the force and vertical
  const double max_tilt = deg2rad(params_.max_tilt_deg);
  const double fz = std::max(force.z(), 1e-6);
  const double horiz = force.head<2>().norm();
  if (horiz > fz * std::tan(max_tilt)) {
    force.head<2>() *= fz * std::tan(max_tilt) / horiz;
    cmd.saturated = true;
  }

  const double hover = vehicle_.hover_thrust();
  double thrust = force.norm();
  if (thrust < vehicle_.min_thrust_factor * hover) {
    thrust = vehicle_.min_thrust_factor * hover;
    cmd.saturated = true;
  } else if (thrust > vehicle_.max_thrust_factor * hover) {
    thrust = vehicle_.max_thrust_factor * hover;
    cmd.saturated = true;
  }
  cmd.thrust_reference = thrust;

  const Vec3 zb = force.normalized();
  const Vec3 xc(std::cos(ref.yaw), std::sin(ref.yaw), 0.0);
  Vec3 yb = zb.cross(xc);
  const double yb_norm = yb.norm();
  if (yb_norm < 1e-9) {
    cmd.attitude_reference = quat_from_yaw(ref.yaw);
  } else {
    yb /= yb_norm;
    const Vec3 xb = yb.cross(zb);
    Mat3 R;
    R.col(0) = xb;
    R.col(1) = yb;
    R.col(2) = zb;
    cmd.attitude_reference = Quat(R).normalized();
  }
  return cmd;
}

}  // namespace insp
