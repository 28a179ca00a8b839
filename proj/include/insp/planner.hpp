#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "insp/geometry.hpp"
#include "insp/point_cloud.hpp"

namespace insp {

struct PlannerParams {
  int n_agents = 1;
  double omega = 7.0;          // standoff offset from the structure, m
  double alpha_deg = 90.0;     // sensor aperture angle, deg
  double beta = 1.0;           // overlap ratio, >= 1
  double r_max = 20.0;         // sensor max range, m
  double v_d = 1.0;            // desired speed, m/s
  double t_s = 0.01;           // controller sampling time, s
  double d_s = 5.0;            // minimum inter-agent separation, m
  double z_start = 0.0;
  double z_end = 1.0;
  double cluster_epsilon = 0.0;  // 0 = auto (3 x median NN spacing)

  void validate() const;
};

/// Vertical distance between inspection planes: (omega / beta) * tan(alpha/2).
double plane_spacing(double omega, double alpha_deg, double beta);

struct Slice {
  double level = 0.0;  // lambda_i
  std::vector<Vec3> points;
};

/// Horizontal slicing: levels z_start + i * spacing while level <= z_end,
/// each slice holding the points whose z lies in [level - s/2, level + s/2)
/// so that every point belongs to at most one slice. Throws when every
/// band is empty.
std::vector<Slice> slice_structure(const PointCloud& cloud, double spacing, double z_start,
                                   double z_end);

struct Branch {
  double slice_level = 0.0;
  std::vector<Vec2> points;  // xy projections of member points
  Vec2 centroid{0.0, 0.0};
  int branch_id = -1;  // persistent id, set by link_branches
};

/// Single-linkage connected components of the slice's xy projections under
/// the chain-distance threshold. Branches come back ordered by centroid
/// angle about the slice centroid (ties: radius, then first point index).
std::vector<Branch> cluster_branches(const Slice& slice, double cluster_epsilon);

/// Assign persistent branch ids across slices: a branch inherits the id of
/// the nearest previous-slice centroid within gate_distance (greedy,
/// distance-ordered, one successor per predecessor); otherwise a fresh id.
void link_branches(std::vector<std::vector<Branch>>& per_slice, double gate_distance);

/// Closed offset loop around a branch: convex hull dilated outward by
/// omega, straight edges joined by circular arcs, counter-clockwise.
class ContourLoop {
 public:
  /// Exact point at arc position s (wrapped into [0, perimeter)).
  Vec2 point_at(double s) const;
  /// Arc position of the loop point nearest to p.
  double nearest_arc(const Vec2& p) const;
  /// Uniform resampling no coarser than spacing (count rounded up).
  std::vector<Vec2> sample(double spacing) const;

  double perimeter() const { return perimeter_; }

 private:
  friend ContourLoop offset_contour(const Branch& branch, double omega, double spacing);
  struct Piece {
    bool is_arc;
    Vec2 center;        // arc center (hull vertex)
    Vec2 a, b;          // edge endpoints
    double ang0, sweep; // arc start angle and CCW sweep
    double len;
    double cum0;        // arc position where the piece starts
  };
  std::vector<Piece> pieces_;
  double perimeter_ = 0.0;
  double radius_ = 0.0;
};

/// Build the offset loop and leave `spacing` as its default sampling step.
/// Every loop point is >= omega - 1e-6 from every branch point.
ContourLoop offset_contour(const Branch& branch, double omega, double spacing);

/// Yaw pointing from the waypoint to the nearest branch point, range
/// (-pi, pi]. Throws when the waypoint coincides with a branch point.
double yaw_reference(const Vec2& waypoint, const Branch& branch);

/// One agent's share of one branch loop in one slice.
struct AssignmentEntry {
  int slice_index = 0;
  double level = 0.0;
  int branch_id = -1;
  int branch_local = 0;  // branch index within the slice's canonical order
  int agent_id = 0;
  int split_index = 0;  // rank among the agents sharing this loop
  int split_count = 1;
};

/// Distribute agents over branches: with m >= n branches each branch gets
/// one agent (branch j -> agent j mod n); with m < n the agents rotate over
/// branches and co-assigned agents split the loop into equal arc-length
/// segments. Throws when a split segment would be shorter than d_s.
std::vector<AssignmentEntry> assign_agents(const std::vector<std::vector<Branch>>& per_slice,
                                           const std::vector<std::vector<double>>& loop_perimeters,
                                           int n_agents, double d_s);

struct Waypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  int slice_index = -1;  // -1 on inter-slice / inter-branch transitions
};

struct AgentPath {
  int agent_id = 0;
  std::vector<Waypoint> waypoints;

  double duration() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }
  double path_length() const;
};

struct MissionPlan {
  PlannerParams params;
  double spacing = 0.0;  // plane spacing actually used
  std::vector<double> slice_levels;
  std::vector<int> branch_counts;  // per slice
  std::vector<AssignmentEntry> assignment;
  std::vector<AgentPath> paths;
};

/// Full pipeline: plane spacing, slicing, branch identification and
/// linking, offset contours, agent assignment, yaw referencing and time
/// parameterization. Deterministic for identical inputs.
MissionPlan plan_mission(const PointCloud& cloud, const PlannerParams& params);

/// Per-agent trajectory CSV: header `t,agent,x,y,z,yaw`, SI units, radians,
/// six decimals.
void save_agent_path_csv(const AgentPath& path, const std::string& file);
AgentPath load_agent_path_csv(const std::string& file);

/// Plan summary (slice levels, branch counts, per-agent duration/length).
void save_plan_summary(const MissionPlan& plan, const std::string& file);

}  // namespace insp
