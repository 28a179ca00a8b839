#include "insp/solid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace insp {
namespace {

constexpr double kIntervalTol = 1e-9;  // minimum parametric overlap that counts as piercing
constexpr double kInsideMargin = 1e-9;

struct Interval {
  double lo, hi;
  bool empty() const { return hi - lo <= kIntervalTol; }
};

double point_segment_dist2d(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// ---------------------------------------------------------------------------
// Tapered cylinder

bool cyl_contains(const TaperedCylinder& c, const Vec3& p, double margin) {
  if (p.z() < c.z0 + margin || p.z() > c.z1 - margin) return false;
  const double rho = (Vec2(p.x(), p.y()) - c.center).norm();
  return rho <= c.radius_at(p.z()) - margin;
}

double cyl_surface_distance(const TaperedCylinder& c, const Vec3& p) {
  const double rho = (Vec2(p.x(), p.y()) - c.center).norm();
  const Vec2 q(rho, p.z());
  double d = point_segment_dist2d(q, Vec2(c.r0, c.z0), Vec2(c.r1, c.z1));  // lateral
  d = std::min(d, point_segment_dist2d(q, Vec2(0.0, c.z0), Vec2(c.r0, c.z0)));  // bottom cap
  d = std::min(d, point_segment_dist2d(q, Vec2(0.0, c.z1), Vec2(c.r1, c.z1)));  // top cap
  return d;
}

// Sub-intervals of [iv] where the segment a + t*(b-a) is inside the frustum.
void cyl_inside_intervals(const TaperedCylinder& c, const Vec3& a, const Vec3& d,
                          Interval iv, std::vector<Interval>& out) {
  // clip by z caps
  if (std::abs(d.z()) < 1e-15) {
    if (a.z() < c.z0 || a.z() > c.z1) return;
  } else {
    double t0 = (c.z0 - a.z()) / d.z();
    double t1 = (c.z1 - a.z()) / d.z();
    if (t0 > t1) std::swap(t0, t1);
    iv.lo = std::max(iv.lo, t0);
    iv.hi = std::min(iv.hi, t1);
    if (iv.empty()) return;
  }

  // rho(t)^2 <= r(z(t))^2  as quadratic A t^2 + B t + C <= 0
  const double k = (c.r1 - c.r0) / (c.z1 - c.z0);
  const double x0 = a.x() - c.center.x();
  const double y0 = a.y() - c.center.y();
  const double rc = c.r0 + k * (a.z() - c.z0);  // linearly extended radius at t = 0
  const double kdz = k * d.z();
  const double A = d.x() * d.x() + d.y() * d.y() - kdz * kdz;
  const double B = 2.0 * (x0 * d.x() + y0 * d.y() - rc * kdz);
  const double C = x0 * x0 + y0 * y0 - rc * rc;

  if (std::abs(A) < 1e-14) {
    if (std::abs(B) < 1e-14) {
      if (C <= 0.0) out.push_back(iv);
      return;
    }
    const double root = -C / B;
    Interval h = (B > 0.0) ? Interval{iv.lo, std::min(iv.hi, root)}
                           : Interval{std::max(iv.lo, root), iv.hi};
    if (!h.empty()) out.push_back(h);
    return;
  }

  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) {
    if (A < 0.0) out.push_back(iv);  // parabola opens down, never positive
    return;
  }
  const double sq = std::sqrt(disc);
  double ra = (-B - sq) / (2.0 * A);
  double rb = (-B + sq) / (2.0 * A);
  if (ra > rb) std::swap(ra, rb);
  if (A > 0.0) {
    Interval h{std::max(iv.lo, ra), std::min(iv.hi, rb)};
    if (!h.empty()) out.push_back(h);
  } else {
    Interval h1{iv.lo, std::min(iv.hi, ra)};
    Interval h2{std::max(iv.lo, rb), iv.hi};
    if (!h1.empty()) out.push_back(h1);
    if (!h2.empty()) out.push_back(h2);
  }
}

// ---------------------------------------------------------------------------
// Tapered slab

struct HalfSpace {
  Vec3 n;     // n . (p - origin) <= c
  double c;
};

std::array<HalfSpace, 6> slab_halfspaces(const TaperedSlab& s) {
  const Vec3 u = s.width_dir;
  const Vec3 w = s.thickness_dir();
  const double gw = (s.width1 - s.width0) / (2.0 * s.length);
  const double gt = (s.thick1 - s.thick0) / (2.0 * s.length);
  return {HalfSpace{-s.axis, 0.0},
          HalfSpace{s.axis, s.length},
          HalfSpace{u - gw * s.axis, s.width0 / 2.0},
          HalfSpace{-u - gw * s.axis, s.width0 / 2.0},
          HalfSpace{w - gt * s.axis, s.thick0 / 2.0},
          HalfSpace{-w - gt * s.axis, s.thick0 / 2.0}};
}

bool slab_contains(const TaperedSlab& s, const Vec3& p, double margin) {
  const Vec3 rel = p - s.origin;
  for (const HalfSpace& h : slab_halfspaces(s)) {
    if (h.n.dot(rel) > h.c - margin * h.n.norm()) return false;
  }
  return true;
}

void slab_inside_intervals(const TaperedSlab& s, const Vec3& a, const Vec3& d,
                           Interval iv, std::vector<Interval>& out) {
  const Vec3 rel = a - s.origin;
  for (const HalfSpace& h : slab_halfspaces(s)) {
    const double f0 = h.n.dot(rel) - h.c;
    const double df = h.n.dot(d);
    if (std::abs(df) < 1e-15) {
      if (f0 > 0.0) return;
    } else {
      const double root = -f0 / df;
      if (df > 0.0) iv.hi = std::min(iv.hi, root);
      else iv.lo = std::max(iv.lo, root);
      if (iv.empty()) return;
    }
  }
  out.push_back(iv);
}

using Quad = std::array<Vec3, 4>;

std::array<Quad, 6> slab_faces(const TaperedSlab& s) {
  const auto c = [&](int e, double sw, double st) { return s.corner(e, sw, st); };
  return {Quad{c(0, -1, -1), c(0, 1, -1), c(0, 1, 1), c(0, -1, 1)},   // root cap
          Quad{c(1, -1, -1), c(1, 1, -1), c(1, 1, 1), c(1, -1, 1)},   // tip cap
          Quad{c(0, 1, -1), c(1, 1, -1), c(1, 1, 1), c(0, 1, 1)},     // +width
          Quad{c(0, -1, -1), c(1, -1, -1), c(1, -1, 1), c(0, -1, 1)}, // -width
          Quad{c(0, -1, 1), c(1, -1, 1), c(1, 1, 1), c(0, 1, 1)},     // +thick
          Quad{c(0, -1, -1), c(1, -1, -1), c(1, 1, -1), c(0, 1, -1)}};// -thick
}

double point_quad_distance(const Vec3& p, const Quad& q) {
  Vec3 n = (q[1] - q[0]).cross(q[2] - q[0]);
  const double nn = n.norm();
  if (nn < 1e-15) {
    // degenerate face (zero width or thickness); fall back to edges
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
      const Vec3& a = q[i];
      const Vec3& b = q[(i + 1) % 4];
      const Vec3 ab = b - a;
      const double l2 = ab.squaredNorm();
      double t = l2 > 0.0 ? (p - a).dot(ab) / l2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, (p - (a + t * ab)).norm());
    }
    return best;
  }
  n /= nn;
  const double h = n.dot(p - q[0]);
  const Vec3 foot = p - h * n;
  bool inside = true;
  for (int i = 0; i < 4 && inside; ++i) {
    const Vec3 edge = q[(i + 1) % 4] - q[i];
    if (n.dot(edge.cross(foot - q[i])) < 0.0) inside = false;
  }
  if (inside) return std::abs(h);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Vec3& a = q[i];
    const Vec3& b = q[(i + 1) % 4];
    const Vec3 ab = b - a;
    const double l2 = ab.squaredNorm();
    double t = l2 > 0.0 ? (p - a).dot(ab) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, (p - (a + t * ab)).norm());
  }
  return best;
}

void sample_quad(const Quad& q, double spacing, std::vector<Vec3>& out) {
  const double lu = std::max((q[1] - q[0]).norm(), (q[2] - q[3]).norm());
  const double lv = std::max((q[3] - q[0]).norm(), (q[2] - q[1]).norm());
  const int nu = std::max(1, static_cast<int>(std::ceil(lu / spacing)));
  const int nv = std::max(1, static_cast<int>(std::ceil(lv / spacing)));
  for (int i = 0; i <= nu; ++i) {
    const double a = static_cast<double>(i) / nu;
    for (int j = 0; j <= nv; ++j) {
      const double b = static_cast<double>(j) / nv;
      const Vec3 p = (1 - a) * (1 - b) * q[0] + a * (1 - b) * q[1] + a * b * q[2] + (1 - a) * b * q[3];
      out.push_back(p);
    }
  }
}

}  // namespace

Vec3 TaperedSlab::corner(int e, double sw, double st) const {
  const double s = e == 0 ? 0.0 : length;
  const double w = e == 0 ? width0 : width1;
  const double t = e == 0 ? thick0 : thick1;
  return origin + s * axis + sw * (w / 2.0) * width_dir + st * (t / 2.0) * thickness_dir();
}

bool SolidModel::contains(const Vec3& p, double margin) const {
  for (const auto& prim : primitives) {
    const bool hit = std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, TaperedCylinder>) return cyl_contains(g, p, margin);
          else return slab_contains(g, p, margin);
        },
        prim);
    if (hit) return true;
  }
  return false;
}

double SolidModel::surface_distance(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& prim : primitives) {
    const double d = std::visit(
        [&](const auto& g) -> double {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, TaperedCylinder>) return cyl_surface_distance(g, p);
          else {
            double m = std::numeric_limits<double>::infinity();
            for (const Quad& f : slab_faces(g)) m = std::min(m, point_quad_distance(p, f));
            return m;
          }
        },
        prim);
    best = std::min(best, d);
  }
  return best;
}

double SolidModel::outside_distance(const Vec3& p) const {
  if (contains(p)) return 0.0;
  return surface_distance(p);
}

PointCloud SolidModel::sample_surfaces(double spacing) const {
  if (spacing <= 0.0) throw std::runtime_error("sample_surfaces: spacing must be > 0");
  PointCloud cloud;
  for (const auto& prim : primitives) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, TaperedCylinder>) {
            const double slant = std::hypot(g.z1 - g.z0, g.r1 - g.r0);
            const int rows = std::max(2, static_cast<int>(std::ceil(slant / spacing)) + 1);
            for (int i = 0; i < rows; ++i) {
              const double z = g.z0 + (g.z1 - g.z0) * i / (rows - 1);
              const double r = g.radius_at(z);
              const int nc = std::max(8, static_cast<int>(std::ceil(2.0 * kPi * r / spacing)));
              for (int j = 0; j < nc; ++j) {
                const double ang = 2.0 * kPi * j / nc;
                cloud.points.emplace_back(g.center.x() + r * std::cos(ang),
                                          g.center.y() + r * std::sin(ang), z);
              }
            }
          } else {
            for (const Quad& f : slab_faces(g)) sample_quad(f, spacing, cloud.points);
          }
        },
        prim);
  }
  return cloud;
}

bool line_of_sight(const SolidModel& model, const Vec3& a, const Vec3& b) {
  if ((b - a).squaredNorm() == 0.0) throw std::invalid_argument("line_of_sight: identical endpoints");
  const Vec3 d = b - a;
  for (const auto& prim : model.primitives) {
    std::vector<Interval> hits;
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, TaperedCylinder>) cyl_inside_intervals(g, a, d, {0.0, 1.0}, hits);
          else slab_inside_intervals(g, a, d, {0.0, 1.0}, hits);
        },
        prim);
    for (const Interval& iv : hits) {
      if (iv.empty()) continue;
      const Vec3 mid = a + 0.5 * (iv.lo + iv.hi) * d;
      if (model.contains(mid, kInsideMargin)) return false;
    }
  }
  return true;
}

void save_solid_model(const SolidModel& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  auto& prims = j["primitives"];
  prims = nlohmann::ordered_json::array();
  for (const auto& prim : model.primitives) {
    nlohmann::ordered_json p;
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, TaperedCylinder>) {
            p["type"] = "tapered_cylinder";
            p["center"] = {g.center.x(), g.center.y()};
            p["z0"] = g.z0;
            p["z1"] = g.z1;
            p["r0"] = g.r0;
            p["r1"] = g.r1;
          } else {
            p["type"] = "tapered_slab";
            p["origin"] = {g.origin.x(), g.origin.y(), g.origin.z()};
            p["axis"] = {g.axis.x(), g.axis.y(), g.axis.z()};
            p["width_dir"] = {g.width_dir.x(), g.width_dir.y(), g.width_dir.z()};
            p["length"] = g.length;
            p["width0"] = g.width0;
            p["width1"] = g.width1;
            p["thick0"] = g.thick0;
            p["thick1"] = g.thick1;
          }
        },
        prim);
    prims.push_back(std::move(p));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write solid model: " + path);
  out << j.dump(2) << "\n";
}

SolidModel load_solid_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open solid model: " + path);
  nlohmann::json j;
  in >> j;
  SolidModel model;
  for (const auto& p : j.at("primitives")) {
    const std::string type = p.at("type");
    if (type == "tapered_cylinder") {
      TaperedCylinder c;
      c.center = Vec2(p.at("center")[0], p.at("center")[1]);
      c.z0 = p.at("z0");
      c.z1 = p.at("z1");
      c.r0 = p.at("r0");
      c.r1 = p.at("r1");
      model.primitives.emplace_back(c);
    } else if (type == "tapered_slab") {
      TaperedSlab s;
      const auto& o = p.at("origin");
      const auto& ax = p.at("axis");
      const auto& wd = p.at("width_dir");
      s.origin = Vec3(o[0], o[1], o[2]);
      s.axis = Vec3(ax[0], ax[1], ax[2]);
      s.width_dir = Vec3(wd[0], wd[1], wd[2]);
      s.length = p.at("length");
      s.width0 = p.at("width0");
      s.width1 = p.at("width1");
      s.thick0 = p.at("thick0");
      s.thick1 = p.at("thick1");
      model.primitives.emplace_back(s);
    } else {
      throw std::runtime_error(path + ": unknown primitive type '" + type + "'");
    }
  }
  return model;
}

}  // namespace insp
