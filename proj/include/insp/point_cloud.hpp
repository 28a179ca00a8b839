#pragma once

#include <string>
#include <utility>
#include <vector>

#include "insp/geometry.hpp"

namespace insp {

/// Finite set of 3D surface points, meters, world frame (z up, z = 0 at
/// ground). Order is preserved by file round-trips.
struct PointCloud {
  std::vector<Vec3> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Parse an ASCII .xyz file, one "x y z" triple per line. Lines starting
/// with '#' and blank lines are skipped. Throws std::runtime_error on a
/// missing file, a malformed line (message carries the line number) or an
/// empty cloud.
PointCloud load_point_cloud(const std::string& path);

/// Write the cloud in .xyz format with full double precision, so a reload
/// reproduces the exact point list.
void save_point_cloud(const PointCloud& cloud, const std::string& path);

/// Exact min/max of the z coordinates. Throws on an empty cloud.
std::pair<double, double> height_bounds(const PointCloud& cloud);

/// Median nearest-neighbor spacing, used for the default clustering
/// threshold. Subsamples large clouds to keep this cheap.
double median_nn_spacing(const PointCloud& cloud);

}  // namespace insp
