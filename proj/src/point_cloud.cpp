#include "insp/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace insp {

PointCloud load_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open point cloud file: " + path);

  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) {
      throw std::runtime_error(path + ": malformed point at line " + std::to_string(line_no));
    }
    std::string trailing;
    if (ss >> trailing) {
      throw std::runtime_error(path + ": malformed point at line " + std::to_string(line_no));
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw std::runtime_error(path + ": non-finite coordinate at line " + std::to_string(line_no));
    }
    cloud.points.emplace_back(x, y, z);
  }
  if (cloud.empty()) throw std::runtime_error(path + ": empty point cloud");
  return cloud;
}

void save_point_cloud(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write point cloud file: " + path);
  out << "# format_version=1\n";
  char buf[96];
  for (const Vec3& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
}

std::pair<double, double> height_bounds(const PointCloud& cloud) {
  if (cloud.empty()) throw std::runtime_error("height_bounds: empty point cloud");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Vec3& p : cloud.points) {
    lo = std::min(lo, p.z());
    hi = std::max(hi, p.z());
  }
  return {lo, hi};
}

double median_nn_spacing(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) return 0.0;

  // Every k-th point against the full cloud; k keeps the probe set near 500.
  const std::size_t stride = std::max<std::size_t>(1, n / 500);
  std::vector<double> nn;
  nn.reserve(n / stride + 1);
  for (std::size_t i = 0; i < n; i += stride) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      best = std::min(best, (cloud.points[i] - cloud.points[j]).squaredNorm());
    }
    nn.push_back(std::sqrt(best));
  }
  std::sort(nn.begin(), nn.end());
  return nn[nn.size() / 2];
}

}  // namespace insp
