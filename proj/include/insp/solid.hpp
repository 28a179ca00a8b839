#pragma once

#include <string>
#include <variant>
#include <vector>

#include "insp/geometry.hpp"
#include "insp/point_cloud.hpp"

namespace insp {

/// Tapered cylinder (cone frustum) with vertical axis: radius varies
/// linearly from r0 at z0 to r1 at z1.
struct TaperedCylinder {
  Vec2 center{0.0, 0.0};  // axis position in the xy plane
  double z0 = 0.0;
  double z1 = 1.0;
  double r0 = 1.0;
  double r1 = 1.0;

  double radius_at(double z) const { return r0 + (r1 - r0) * (z - z0) / (z1 - z0); }
};

/// Convex slab with linearly tapered rectangular cross-section: runs from
/// origin along axis for length meters; the cross-section at arc position s
/// is width(s) x thickness(s) with width along width_dir and thickness
/// along axis x width_dir. A box is the untapered special case.
struct TaperedSlab {
  Vec3 origin = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();       // unit
  Vec3 width_dir = Vec3::UnitX();  // unit, orthogonal to axis
  double length = 1.0;
  double width0 = 1.0;
  double width1 = 1.0;
  double thick0 = 1.0;
  double thick1 = 1.0;

  Vec3 thickness_dir() const { return axis.cross(width_dir); }
  /// Corner at end index e (0 or 1), width sign sw, thickness sign st.
  Vec3 corner(int e, double sw, double st) const;
};

using SolidPrimitive = std::variant<TaperedCylinder, TaperedSlab>;

/// Set of convex primitives approximating the structure. Queries are
/// read-only and safe for concurrent readers.
struct SolidModel {
  std::vector<SolidPrimitive> primitives;

  bool empty() const { return primitives.empty(); }

  /// True iff point p is strictly inside some primitive by at least margin.
  bool contains(const Vec3& p, double margin = 0.0) const;

  /// Unsigned distance from p to the nearest primitive surface.
  double surface_distance(const Vec3& p) const;

  /// Distance from p to the solid (0 when inside).
  double outside_distance(const Vec3& p) const;

  /// Sample every primitive surface on a grid no coarser than spacing.
  PointCloud sample_surfaces(double spacing) const;
};

/// True iff the open segment (a, b) intersects no primitive interior.
/// Tangential grazing contacts count as visible. Requires a != b.
bool line_of_sight(const SolidModel& model, const Vec3& a, const Vec3& b);

void save_solid_model(const SolidModel& model, const std::string& path);
SolidModel load_solid_model(const std::string& path);

}  // namespace insp
