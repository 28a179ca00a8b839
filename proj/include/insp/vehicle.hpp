#pragma once

#include "insp/eskf.hpp"
#include "insp/geometry.hpp"
#include "insp/rng.hpp"

namespace insp {

/// Ground-truth rigid-body state of one MAV.
struct VehicleState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 angular_rate = Vec3::Zero();  // body frame
  Vec3 acceleration = Vec3::Zero();  // world frame, from the last step
  double timestamp = 0.0;
};

/// Mean wind plus first-order Gauss-Markov gusts, total speed capped.
struct WindModel {
  Vec3 mean_wind = Vec3::Zero();     // m/s, world frame
  double gust_std = 0.0;             // per-axis stationary std, m/s
  double gust_time_constant = 2.0;   // s
  double max_speed = 13.0;           // m/s cap on the total wind speed
  // Gusts are scaled by this factor within proximity_radius of the
  // structure axis, standing in for turbulence shed by the structure.
  double proximity_gust_factor = 1.0;
  double proximity_radius = 0.0;

  void validate() const;
};

/// Stateful per-agent wind process; deterministic for a given seed.
class WindSimulator {
 public:
  WindSimulator(const WindModel& model, std::uint64_t seed);

  /// Advance the gust state by dt and return the total wind velocity at
  /// the given position.
  Vec3 sample(double dt, const Vec3& position = Vec3::Zero());

  const Vec3& gust() const { return gust_; }

 private:
  WindModel model_;
  RandomStream rng_;
  Vec3 gust_ = Vec3::Zero();
};

struct ControlCommand {
  Quat attitude_reference = Quat::Identity();
  double thrust_reference = 0.0;  // N, along body z
  bool saturated = false;
};

/// Point-mass-with-attitude MAV model: the attitude tracks the reference
/// through a first-order response, thrust acts along body z, drag is linear
/// in the air-relative velocity.
struct MavParams {
  double mass = 3.5;                    // kg
  double drag_coefficient = 0.45;       // N s/m per axis
  double attitude_time_constant = 0.15; // s
  double max_thrust_factor = 1.7;       // x hover thrust
  double min_thrust_factor = 0.3;

  double hover_thrust() const { return mass * kGravity; }
  void validate() const;
};

/// Symplectic-Euler step of the truth dynamics. dt in (0, 0.02].
VehicleState step_dynamics(const VehicleState& state, const ControlCommand& cmd, const Vec3& wind,
                           double dt, const MavParams& params);

/// IMU synthesis noise; per-sample stds derive from the densities and dt so
/// they match the estimator's process model.
struct ImuNoiseParams {
  double accel_noise_density = 0.005;  // m/s^2/sqrt(Hz)
  double gyro_noise_density = 0.0002;  // rad/s/sqrt(Hz)
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
};

/// Body-frame specific force and angular rate with bias and white noise.
ImuSample sample_imu(const VehicleState& state, const ImuNoiseParams& noise, double dt,
                     RandomStream& rng);

}  // namespace insp
