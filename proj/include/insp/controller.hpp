#pragma once

#include "insp/geometry.hpp"
#include "insp/vehicle.hpp"

namespace insp {

/// Linear MPC over a per-axis jerk-driven triple integrator, solved in
/// closed form (finite-horizon Riccati recursion, no QP): the first jerk of
/// the optimal sequence is a linear feedback on the tracking error.
/// Commanded acceleration maps to attitude and thrust with tilt and thrust
/// saturations. jerk_weight damps commanded angular movement: raising it
/// trades tracking error for calmer attitude.
struct ControllerParams {
  double position_weight = 40.0;
  double velocity_weight = 12.0;
  double jerk_weight = 1.0;
  double horizon = 2.0;     // s
  double t_s = 0.01;        // s
  double max_tilt_deg = 25.0;

  void validate() const;
};

struct PositionReference {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double yaw = 0.0;
};

class PositionController {
 public:
  PositionController(const ControllerParams& params, const MavParams& vehicle);

  /// One control step from the estimated state toward the reference.
  ControlCommand command(const Vec3& est_position, const Vec3& est_velocity,
                         const PositionReference& ref);

  /// Drop the internal acceleration state back to hover.
  void reset();

  const Eigen::RowVector3d& gain() const { return gain_; }

 private:
  ControllerParams params_;
  MavParams vehicle_;
  Eigen::RowVector3d gain_;         // first-step LQ feedback on [p_err, v_err, a_err]
  Vec3 accel_cmd_ = Vec3::Zero();   // integrated jerk, world frame
};

}  // namespace insp
