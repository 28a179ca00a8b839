#pragma once

#include <deque>

#include "insp/geometry.hpp"
#include "insp/uwb.hpp"

namespace insp {

struct ImuSample {
  double timestamp = 0.0;
  Vec3 specific_force = Vec3::Zero();  // body frame, m/s^2
  Vec3 angular_rate = Vec3::Zero();    // body frame, rad/s
};

/// Navigation state with a 15-dimensional error-state covariance ordered
/// [position, velocity, attitude, accel bias, gyro bias].
struct NavState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Quat orientation = Quat::Identity();  // body -> world
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  Eigen::Matrix<double, 15, 15> covariance = Eigen::Matrix<double, 15, 15>::Zero();
  double timestamp = 0.0;
};

struct EskfParams {
  // continuous-time noise densities
  double accel_noise_density = 0.005;    // m/s^2/sqrt(Hz)
  double gyro_noise_density = 0.0002;    // rad/s/sqrt(Hz)
  double accel_bias_rw_density = 1e-5;   // m/s^2*sqrt(Hz) random walk
  double gyro_bias_rw_density = 1e-6;    // rad/s*sqrt(Hz) random walk

  // initial error-state standard deviations
  double init_pos_std = 0.5;       // m
  double init_vel_std = 0.1;       // m/s
  double init_att_std = 0.02;      // rad (roll/pitch)
  double init_yaw_std = 0.05;      // rad
  double init_accel_bias_std = 0.05;
  double init_gyro_bias_std = 0.002;

  // measurement models
  double range_noise_std = 0.1;    // m
  double heading_noise_std = deg2rad(2.0);
  double innovation_gate = 3.0;    // sigmas

  double buffer_horizon = 0.5;     // s of history kept for delayed updates
};

enum class UpdateStatus { applied, rejected_gate, rejected_stale, skipped_singular };

/// Error-state Kalman filter fusing strapdown IMU propagation with UWB
/// range (and optional heading) corrections. Single-owner, sequential.
class Eskf {
 public:
  explicit Eskf(const EskfParams& params = EskfParams());

  /// Reset the nominal state and build the initial covariance from the
  /// parameter priors.
  void initialize(const Vec3& position, double yaw, double timestamp);

  const NavState& state() const { return state_; }
  NavState& mutable_state() { return state_; }
  const EskfParams& params() const { return params_; }
  int rejected_count() const { return rejected_; }

  /// Strapdown propagation with bias-corrected IMU and first-order
  /// error-state covariance transition. dt in (0, 0.1].
  void propagate(const ImuSample& imu, double dt);

  /// Range correction applied at the current state. Innovations beyond the
  /// gate leave the state unchanged.
  UpdateStatus update_range(const RangeMeasurement& meas, const AnchorSet& anchors);

  /// Delayed-measurement correction: the update is applied at the buffered
  /// state nearest meas.timestamp and propagation is replayed to the
  /// present. With zero latency this reduces to update_range exactly.
  UpdateStatus process_range(const RangeMeasurement& meas, const AnchorSet& anchors);

  /// Simulated heading aid (yaw angle measurement, world frame).
  UpdateStatus update_heading(double yaw_measured);

  /// Stateless single-state range update, shared by the direct and the
  /// replayed paths.
  static UpdateStatus apply_range_update(NavState& state, const RangeMeasurement& meas,
                                         const AnchorSet& anchors, const EskfParams& params,
                                         int* rejected);

  /// Measurement Jacobian of the range model at the given state (1x15).
  static Eigen::Matrix<double, 1, 15> range_jacobian(const NavState& state, const Vec3& anchor);

 private:
  struct HistoryEntry {
    ImuSample imu;
    double dt = 0.0;
    NavState post;  // state after processing this IMU sample
  };

  static void propagate_state(NavState& state, const ImuSample& imu, double dt,
                              const EskfParams& params);
  static UpdateStatus apply_scalar_update(NavState& state, double innovation,
                                          const Eigen::Matrix<double, 1, 15>& H, double noise_var,
                                          double gate, int* rejected);

  EskfParams params_;
  NavState state_;
  std::deque<HistoryEntry> history_;
  int rejected_ = 0;
};

/// Convenience driver: propagation at every IMU sample, delayed-aware
/// correction at every range, states emitted at the IMU rate.
std::vector<NavState> run_estimator(Eskf& filter, const std::vector<ImuSample>& imu_stream,
                                    const std::vector<RangeMeasurement>& range_stream,
                                    const AnchorSet& anchors);

}  // namespace insp
