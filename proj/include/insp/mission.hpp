#pragma once

#include <string>
#include <vector>

#include "insp/controller.hpp"
#include "insp/eskf.hpp"
#include "insp/planner.hpp"
#include "insp/point_cloud.hpp"
#include "insp/solid.hpp"
#include "insp/uwb.hpp"
#include "insp/vehicle.hpp"

namespace insp {

struct TraceSample {
  double t = 0.0;
  Waypoint reference;
  VehicleState truth;
  NavState estimate;
  ControlCommand command;
};

/// Per-agent closed-loop record on the uniform 100 Hz mission timeline.
struct SimTrace {
  int agent_id = 0;
  std::vector<TraceSample> samples;
};

struct SimSetup {
  UwbNoiseModel uwb;
  WindModel wind;
  MavParams vehicle;
  ControllerParams controller;
  EskfParams estimator;
  ImuNoiseParams imu;        // bias fields are overwritten by per-run draws
  double imu_rate = 100.0;   // Hz; must equal 1 / planner t_s
  double warmup = 10.0;      // s of static initialization before the mission
  double heading_rate = 10.0;
  bool heading_aid = true;
  double divergence_abort = 20.0;  // m
  std::uint64_t seed = 1;
};

/// Run the closed loop for every agent: IMU synthesis, estimator
/// propagation and correction, position control on the estimate, truth
/// dynamics under wind. Deterministic per seed. Throws on estimator
/// divergence.
std::vector<SimTrace> run_mission(const MissionPlan& plan, const AnchorSet& anchors,
                                  const SolidModel& solid, const SimSetup& setup);

/// Same loop driven by externally loaded reference paths (plan files).
std::vector<SimTrace> run_mission_paths(const std::vector<AgentPath>& paths,
                                        const AnchorSet& anchors, const SolidModel& solid,
                                        const SimSetup& setup);

enum class RmseMode { reference_vs_truth, truth_vs_estimate };

/// Root-mean-square 3D position error over the trace.
double tracking_rmse(const SimTrace& trace, RmseMode mode);

struct SafetyViolation {
  double t = 0.0;
  std::string kind;  // "inter_agent" or "structure"
  double value = 0.0;
};

struct SafetyAudit {
  double min_inter_agent = std::numeric_limits<double>::infinity();  // inf with one agent
  double min_structure_distance = std::numeric_limits<double>::infinity();
  std::vector<SafetyViolation> violations;
};

/// Pairwise inter-agent distances at matched timestamps plus agent to
/// structure clearance; violations below d_s and omega/2 respectively.
SafetyAudit safety_audit(const std::vector<SimTrace>& traces, double d_s, double omega,
                         const SolidModel& solid);

struct CoverageSetup {
  double alpha_deg = 90.0;
  double r_max = 20.0;
  double band_lo = 0.0;   // evaluation band, clipped to the visibility cap
  double band_hi = 1.0;
  double cap_lo = -1e30;  // z range the plan can see at all
  double cap_hi = 1e30;
  double frame_rate = 5.0;  // camera evaluation rate, Hz
  std::vector<double> slice_levels;
  double plane_spacing = 1.0;
};

struct CoverageReport {
  std::vector<int> view_counts;        // per cloud point; -1 = outside band
  std::size_t points_in_band = 0;
  double covered_fraction = 0.0;
  double overlap_fraction = 0.0;       // seen from >= 2 distinct slice passes
  std::vector<std::size_t> uncovered;  // indices of unseen band points
};

/// Count camera frames seeing each structure point: within range, inside
/// the aperture cone about the body-x axis, and in line of sight.
CoverageReport coverage_report(const std::vector<SimTrace>& traces, const PointCloud& cloud,
                               const SolidModel& solid, const CoverageSetup& setup);

struct RmseSummary {
  std::vector<double> tracking_per_agent;
  std::vector<double> estimation_per_agent;
  double tracking_overall = 0.0;
  double estimation_overall = 0.0;
};

RmseSummary rmse_summary(const std::vector<SimTrace>& traces);

/// Trace series CSV per agent:
/// t,ref_x,ref_y,ref_z,ref_yaw,true_x,true_y,true_z,true_qw,true_qx,true_qy,
/// true_qz,est_x,est_y,est_z,err
void save_trace_csv(const SimTrace& trace, const std::string& file);
SimTrace load_trace_csv(const std::string& file);

struct ReportInputs {
  std::string mission_name;
  std::uint64_t seed = 0;
  std::string config_hash;
  RmseSummary rmse;
  CoverageReport coverage;
  SafetyAudit safety;
  std::vector<const SimTrace*> traces;
};

/// Machine-readable mission report plus the coverage histogram CSV.
void write_report(const ReportInputs& in, const std::string& report_file,
                  const std::string& histogram_file);

}  // namespace insp
