#include "insp/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace insp {

void WindModel::validate() const {
  if (gust_std < 0.0) throw std::invalid_argument("wind: gust_std must be >= 0");
  if (!(gust_time_constant > 0.0)) throw std::invalid_argument("wind: time constant must be > 0");
  if (!(max_speed > 0.0)) throw std::invalid_argument("wind: max_speed must be > 0");
  if (proximity_gust_factor < 0.0) throw std::invalid_argument("wind: proximity factor must be >= 0");
}

WindSimulator::WindSimulator(const WindModel& model, std::uint64_t seed)
    : model_(model), rng_(seed) {
  model_.validate();
}

Vec3 WindSimulator::sample(double dt, const Vec3& position) {
  if (!(dt > 0.0)) throw std::invalid_argument("wind: dt must be > 0");

  // exact discretization of the Ornstein-Uhlenbeck gust process
  const double decay = std::exp(-dt / model_.gust_time_constant);
  const double drive_std = model_.gust_std * std::sqrt(1.0 - decay * decay);
  gust_ = decay * gust_ + rng_.gaussian_vec3(drive_std);

  double factor = 1.0;
  if (model_.proximity_radius > 0.0 &&
      position.head<2>().norm() <= model_.proximity_radius) {
    factor = model_.proximity_gust_factor;
  }

  Vec3 wind = model_.mean_wind + factor * gust_;
  const double speed = wind.norm();
  if (speed > model_.max_speed) wind *= model_.max_speed / speed;
  return wind;
}

void MavParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("vehicle: mass must be > 0");
  if (drag_coefficient < 0.0) throw std::invalid_argument("vehicle: drag must be >= 0");
  if (!(attitude_time_constant > 0.0)) {
    throw std::invalid_argument("vehicle: attitude time constant must be > 0");
  }
}

VehicleState step_dynamics(const VehicleState& state, const ControlCommand& cmd, const Vec3& wind,
                           double dt, const MavParams& params) {
  if (!(dt > 0.0) || dt > 0.02) throw std::invalid_argument("step_dynamics: dt must be in (0, 0.02]");

  VehicleState next = state;

  // first-order attitude response toward the reference
  const Quat err = state.orientation.conjugate() * cmd.attitude_reference;
  const Vec3 rot_err = quat_log(err);
  next.angular_rate = rot_err / params.attitude_time_constant;
  next.orientation = (state.orientation * quat_exp(next.angular_rate * dt)).normalized();

  const double thrust = std::clamp(cmd.thrust_reference, 0.0,
                                   params.max_thrust_factor * params.hover_thrust());
  const Vec3 thrust_world = next.orientation * Vec3(0.0, 0.0, thrust);
  const Vec3 drag = -params.drag_coefficient * (state.velocity - wind);
  const Vec3 accel =
      thrust_world / params.mass + Vec3(0.0, 0.0, -kGravity) + drag / params.mass;

  next.velocity = state.velocity + accel * dt;
  next.position = state.position + next.velocity * dt;
  next.acceleration = accel;
  next.timestamp = state.timestamp + dt;
  return next;
}

ImuSample sample_imu(const VehicleState& state, const ImuNoiseParams& noise, double dt,
                     RandomStream& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_imu: dt must be > 0");
  const double accel_std = noise.accel_noise_density / std::sqrt(dt);
  const double gyro_std = noise.gyro_noise_density / std::sqrt(dt);

  const Mat3 Rt = state.orientation.toRotationMatrix().transpose();
  ImuSample s;
  s.timestamp = state.timestamp;
  s.specific_force = Rt * (state.acceleration - Vec3(0.0, 0.0, -kGravity)) + noise.accel_bias +
                     rng.gaussian_vec3(accel_std);
  s.angular_rate = state.angular_rate + noise.gyro_bias + rng.gaussian_vec3(gyro_std);
  return s;
}

}  // namespace insp
