#include "insp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace insp {

void PlannerParams::validate() const {
  if (n_agents < 1) throw std::invalid_argument("planner: n_agents must be >= 1");
  if (!(omega > 0.0)) throw std::invalid_argument("planner: omega must be > 0");
  if (!(omega < r_max)) throw std::invalid_argument("planner: omega must be < r_max");
  if (!(alpha_deg > 0.0 && alpha_deg < 180.0)) {
    throw std::invalid_argument("planner: alpha must be in (0, 180) degrees");
  }
  if (!(beta >= 1.0)) throw std::invalid_argument("planner: beta must be >= 1");
  if (!(v_d > 0.0)) throw std::invalid_argument("planner: v_d must be > 0");
  if (!(t_s > 0.0)) throw std::invalid_argument("planner: t_s must be > 0");
  if (!(d_s > 0.0)) throw std::invalid_argument("planner: d_s must be > 0");
  if (!(z_start < z_end)) throw std::invalid_argument("planner: z_start must be < z_end");
  if (cluster_epsilon < 0.0) throw std::invalid_argument("planner: cluster_epsilon must be >= 0");
}

double plane_spacing(double omega, double alpha_deg, double beta) {
  if (!(omega > 0.0)) throw std::invalid_argument("plane_spacing: omega must be > 0");
  if (!(alpha_deg > 0.0 && alpha_deg < 180.0)) {
    throw std::invalid_argument("plane_spacing: alpha must be in (0, 180) degrees");
  }
  if (!(beta >= 1.0)) throw std::invalid_argument("plane_spacing: beta must be >= 1");
  return omega / beta * std::tan(deg2rad(alpha_deg) / 2.0);
}

std::vector<Slice> slice_structure(const PointCloud& cloud, double spacing, double z_start,
                                   double z_end) {
  if (!(spacing > 0.0)) throw std::invalid_argument("slice_structure: spacing must be > 0");
  if (cloud.empty()) throw std::invalid_argument("slice_structure: empty cloud");
  const double max_z = height_bounds(cloud).second;
  if (!(z_start <= z_end)) throw std::invalid_argument("slice_structure: z_start must be <= z_end");
  if (z_end > max_z + spacing) {
    throw std::invalid_argument("slice_structure: z_end exceeds structure top by more than one spacing");
  }

  const int count = static_cast<int>(std::floor((z_end - z_start) / spacing + 1e-9)) + 1;
  std::vector<Slice> slices(count);
  for (int i = 0; i < count; ++i) slices[i].level = z_start + i * spacing;

  for (const Vec3& p : cloud.points) {
    const double idx = std::floor((p.z() - z_start) / spacing + 0.5);
    if (idx < 0.0 || idx >= count) continue;
    const int i = static_cast<int>(idx);
    if (p.z() >= slices[i].level - spacing / 2.0 && p.z() < slices[i].level + spacing / 2.0) {
      slices[i].points.push_back(p);
    }
  }

  const bool any = std::any_of(slices.begin(), slices.end(),
                               [](const Slice& s) { return !s.points.empty(); });
  if (!any) throw std::runtime_error("slice_structure: no structure points in any slice band");
  return slices;
}

// ---------------------------------------------------------------------------
// Branch clustering

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<Branch> cluster_branches(const Slice& slice, double cluster_epsilon) {
  if (slice.points.empty()) throw std::invalid_argument("cluster_branches: empty slice");
  if (!(cluster_epsilon > 0.0)) throw std::invalid_argument("cluster_branches: epsilon must be > 0");

  const std::size_t n = slice.points.size();
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = slice.points[i].head<2>();

  // Grid bucketing with cell size epsilon keeps the pair checks local.
  const double cell = cluster_epsilon;
  const double eps2 = cluster_epsilon * cluster_epsilon;
  std::map<std::pair<long long, long long>, std::vector<int>> grid;
  auto key = [&](const Vec2& p) {
    return std::make_pair(static_cast<long long>(std::floor(p.x() / cell)),
                          static_cast<long long>(std::floor(p.y() / cell)));
  };
  for (std::size_t i = 0; i < n; ++i) grid[key(pts[i])].push_back(static_cast<int>(i));

  UnionFind uf(n);
  for (const auto& [k, members] : grid) {
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({k.first + dx, k.second + dy});
        if (it == grid.end()) continue;
        for (int i : members) {
          for (int j : it->second) {
            if (j <= i) continue;
            if ((pts[i] - pts[j]).squaredNorm() <= eps2) uf.unite(i, j);
          }
        }
      }
    }
  }

  std::map<int, Branch> by_root;
  std::map<int, int> first_index;
  for (std::size_t i = 0; i < n; ++i) {
    const int root = uf.find(static_cast<int>(i));
    auto& branch = by_root[root];
    if (branch.points.empty()) first_index[root] = static_cast<int>(i);
    branch.points.push_back(pts[i]);
  }

  Vec2 slice_centroid = Vec2::Zero();
  for (const Vec2& p : pts) slice_centroid += p;
  slice_centroid /= static_cast<double>(n);

  struct Keyed {
    double angle, radius;
    int first;
    Branch branch;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(by_root.size());
  for (auto& [root, branch] : by_root) {
    branch.slice_level = slice.level;
    branch.centroid = Vec2::Zero();
    for (const Vec2& p : branch.points) branch.centroid += p;
    branch.centroid /= static_cast<double>(branch.points.size());
    const Vec2 rel = branch.centroid - slice_centroid;
    keyed.push_back({std::atan2(rel.y(), rel.x()), rel.norm(), first_index[root], std::move(branch)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.radius != b.radius) return a.radius < b.radius;
    return a.first < b.first;
  });

  std::vector<Branch> out;
  out.reserve(keyed.size());
  for (auto& k : keyed) out.push_back(std::move(k.branch));
  return out;
}

void link_branches(std::vector<std::vector<Branch>>& per_slice, double gate_distance) {
  int next_id = 0;
  for (std::size_t s = 0; s < per_slice.size(); ++s) {
    auto& current = per_slice[s];
    const std::vector<Branch>* prev = nullptr;
    if (s > 0 && !per_slice[s - 1].empty()) prev = &per_slice[s - 1];

    for (Branch& b : current) b.branch_id = -1;

    if (prev != nullptr) {
      struct Pair {
        double dist;
        int prev_idx, cur_idx;
      };
      std::vector<Pair> pairs;
      for (std::size_t i = 0; i < prev->size(); ++i) {
        for (std::size_t j = 0; j < current.size(); ++j) {
          const double d = ((*prev)[i].centroid - current[j].centroid).norm();
          if (d <= gate_distance) pairs.push_back({d, static_cast<int>(i), static_cast<int>(j)});
        }
      }
      std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.prev_idx != b.prev_idx) return a.prev_idx < b.prev_idx;
        return a.cur_idx < b.cur_idx;
      });
      std::vector<bool> prev_used(prev->size(), false);
      for (const Pair& p : pairs) {
        if (prev_used[p.prev_idx] || current[p.cur_idx].branch_id != -1) continue;
        current[p.cur_idx].branch_id = (*prev)[p.prev_idx].branch_id;
        prev_used[p.prev_idx] = true;
      }
    }
    for (Branch& b : current) {
      if (b.branch_id == -1) b.branch_id = next_id++;
    }
  }
}

// ---------------------------------------------------------------------------
// Offset contours

namespace {

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x() == b.x() && a.y() == b.y(); }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;

  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);  // CCW, last point == first removed
  return hull;
}

}  // namespace

Vec2 ContourLoop::point_at(double s) const {
  s = std::fmod(s, perimeter_);
  if (s < 0.0) s += perimeter_;
  // pieces_ sorted by cum0
  std::size_t lo = 0, hi = pieces_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (pieces_[mid].cum0 <= s) lo = mid;
    else hi = mid;
  }
  const Piece& p = pieces_[lo];
  const double local = s - p.cum0;
  if (p.is_arc) {
    const double ang = p.ang0 + p.sweep * (local / p.len);
    return p.center + radius_ * Vec2(std::cos(ang), std::sin(ang));
  }
  const double f = local / p.len;
  return p.a + f * (p.b - p.a);
}

double ContourLoop::nearest_arc(const Vec2& q) const {
  // fine scan then local refinement; loops are smooth so this is plenty
  const int n = std::max<int>(64, static_cast<int>(perimeter_ / 0.05));
  double best_s = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = perimeter_ * i / n;
    const double d = (point_at(s) - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  double step = perimeter_ / n;
  while (step > 1e-7) {
    for (const double cand : {best_s - step / 2.0, best_s + step / 2.0}) {
      const double d = (point_at(cand) - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best_s = cand;
      }
    }
    step /= 2.0;
  }
  best_s = std::fmod(best_s, perimeter_);
  if (best_s < 0.0) best_s += perimeter_;
  return best_s;
}

std::vector<Vec2> ContourLoop::sample(double spacing) const {
  if (!(spacing > 0.0)) throw std::invalid_argument("contour sample: spacing must be > 0");
  const int n = std::max(8, static_cast<int>(std::ceil(perimeter_ / spacing)));
  std::vector<Vec2> out(n);
  for (int i = 0; i < n; ++i) out[i] = point_at(perimeter_ * i / n);
  return out;
}

ContourLoop offset_contour(const Branch& branch, double omega, double spacing) {
  if (branch.points.empty()) throw std::invalid_argument("offset_contour: empty branch");
  if (!(omega > 0.0)) throw std::invalid_argument("offset_contour: omega must be > 0");
  if (!(spacing > 0.0)) throw std::invalid_argument("offset_contour: spacing must be > 0");

  ContourLoop loop;
  loop.radius_ = omega;
  std::vector<Vec2> hull = convex_hull(branch.points);

  auto push_arc = [&](const Vec2& center, double ang0, double sweep) {
    if (sweep <= 1e-12) return;
    ContourLoop::Piece p;
    p.is_arc = true;
    p.center = center;
    p.ang0 = ang0;
    p.sweep = sweep;
    p.len = omega * sweep;
    p.cum0 = loop.perimeter_;
    loop.pieces_.push_back(p);
    loop.perimeter_ += p.len;
  };
  auto push_edge = [&](const Vec2& a, const Vec2& b) {
    const double len = (b - a).norm();
    if (len <= 1e-12) return;
    ContourLoop::Piece p;
    p.is_arc = false;
    p.a = a;
    p.b = b;
    p.len = len;
    p.cum0 = loop.perimeter_;
    loop.pieces_.push_back(p);
    loop.perimeter_ += len;
  };

  if (hull.size() == 1) {
    push_arc(hull[0], 0.0, 2.0 * kPi);
  } else {
    // Degenerate two-point hulls walk the segment twice, which the generic
    // edge/arc construction below handles as a stadium.
    const std::size_t m = hull.size();
    std::vector<double> normal_angle(m);
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2 e = hull[(i + 1) % m] - hull[i];
      normal_angle[i] = std::atan2(-e.x(), e.y());  // outward normal of a CCW polygon
    }
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t prev = (i + m - 1) % m;
      double sweep = normal_angle[i] - normal_angle[prev];
      while (sweep < 0.0) sweep += 2.0 * kPi;
      while (sweep >= 2.0 * kPi) sweep -= 2.0 * kPi;
      if (m == 2 && sweep == 0.0) sweep = kPi;  // antiparallel edges
      push_arc(hull[i], normal_angle[prev], sweep);
      const Vec2 n(std::cos(normal_angle[i]), std::sin(normal_angle[i]));
      push_edge(hull[i] + omega * n, hull[(i + 1) % m] + omega * n);
    }
  }
  return loop;
}

double yaw_reference(const Vec2& waypoint, const Branch& branch) {
  if (branch.points.empty()) throw std::invalid_argument("yaw_reference: empty branch");
  double best = std::numeric_limits<double>::infinity();
  Vec2 nearest = branch.points.front();
  for (const Vec2& p : branch.points) {
    const double d = (p - waypoint).squaredNorm();
    if (d < best) {
      best = d;
      nearest = p;
    }
  }
  if (best <= 0.0) throw std::runtime_error("yaw_reference: waypoint coincides with a branch point");
  const Vec2 dir = nearest - waypoint;
  return std::atan2(dir.y(), dir.x());
}

// ---------------------------------------------------------------------------
// Agent assignment

std::vector<AssignmentEntry> assign_agents(const std::vector<std::vector<Branch>>& per_slice,
                                           const std::vector<std::vector<double>>& loop_perimeters,
                                           int n_agents, double d_s) {
  if (n_agents < 1) throw std::invalid_argument("assign_agents: n_agents must be >= 1");
  std::vector<AssignmentEntry> table;

  for (std::size_t s = 0; s < per_slice.size(); ++s) {
    const auto& branches = per_slice[s];
    const int m = static_cast<int>(branches.size());
    if (m == 0) continue;

    if (m >= n_agents) {
      for (int j = 0; j < m; ++j) {
        AssignmentEntry e;
        e.slice_index = static_cast<int>(s);
        e.level = branches[j].slice_level;
        e.branch_id = branches[j].branch_id;
        e.branch_local = j;
        e.agent_id = j % n_agents;
        e.split_index = 0;
        e.split_count = 1;
        table.push_back(e);
      }
    } else {
      for (int j = 0; j < m; ++j) {
        std::vector<int> agents;
        for (int a = 0; a < n_agents; ++a) {
          if (a % m == j) agents.push_back(a);
        }
        const int k = static_cast<int>(agents.size());
        const double segment = loop_perimeters[s][j] / k;
        if (segment < d_s) {
          throw std::runtime_error("assign_agents: contour too short for " + std::to_string(k) +
                                   " agents at separation d_s (slice " + std::to_string(s) + ")");
        }
        for (int r = 0; r < k; ++r) {
          AssignmentEntry e;
          e.slice_index = static_cast<int>(s);
          e.level = branches[j].slice_level;
          e.branch_id = branches[j].branch_id;
          e.branch_local = j;
          e.agent_id = agents[r];
          e.split_index = r;
          e.split_count = k;
          table.push_back(e);
        }
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Time parameterization and the full pipeline

double AgentPath::path_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    len += (waypoints[i].position - waypoints[i - 1].position).norm();
  }
  return len;
}

namespace {

struct RoutePiece {
  // contour arc when loop != nullptr, otherwise a straight transition
  const ContourLoop* loop = nullptr;
  const Branch* branch = nullptr;
  double s_start = 0.0;
  double s_len = 0.0;
  int slice_index = -1;
  Vec3 from = Vec3::Zero(), to = Vec3::Zero();
  double yaw_from = 0.0, yaw_to = 0.0;
  double level = 0.0;

  double length() const { return loop != nullptr ? s_len : (to - from).norm(); }
};

AgentPath parameterize_route(int agent_id, const std::vector<RoutePiece>& route, double v_d,
                             double t_s) {
  AgentPath path;
  path.agent_id = agent_id;

  auto eval = [&](const RoutePiece& p, double local) {
    Waypoint w;
    if (p.loop != nullptr) {
      const Vec2 xy = p.loop->point_at(p.s_start + local);
      w.position = Vec3(xy.x(), xy.y(), p.level);
      w.yaw = yaw_reference(xy, *p.branch);
      w.slice_index = p.slice_index;
    } else {
      const double f = p.length() > 0.0 ? local / p.length() : 0.0;
      w.position = p.from + f * (p.to - p.from);
      w.yaw = wrap_angle(p.yaw_from + f * angle_diff(p.yaw_to, p.yaw_from));
      w.slice_index = p.slice_index;
    }
    return w;
  };

  double total = 0.0;
  for (const RoutePiece& p : route) total += p.length();
  if (route.empty() || total <= 0.0) {
    if (!route.empty()) {
      Waypoint w = eval(route.front(), 0.0);
      w.t = 0.0;
      path.waypoints.push_back(w);
    }
    return path;
  }

  const double h = v_d * t_s;
  const int steps = static_cast<int>(std::ceil(total / h - 1e-9));
  std::size_t piece = 0;
  double piece_start = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double s = std::min(static_cast<double>(k) * h, total);
    while (piece + 1 < route.size() && s > piece_start + route[piece].length() + 1e-12) {
      piece_start += route[piece].length();
      ++piece;
    }
    const double local = std::min(s - piece_start, route[piece].length());
    Waypoint w = eval(route[piece], local);
    w.t = k * t_s;
    path.waypoints.push_back(w);
  }
  return path;
}

}  // namespace

MissionPlan plan_mission(const PointCloud& cloud, const PlannerParams& params_in) {
  PlannerParams params = params_in;
  params.validate();
  if (cloud.empty()) throw std::invalid_argument("plan_mission: empty cloud");
  if (params.cluster_epsilon <= 0.0) {
    params.cluster_epsilon = 3.0 * median_nn_spacing(cloud);
    if (!(params.cluster_epsilon > 0.0)) {
      throw std::runtime_error("plan_mission: cannot derive cluster_epsilon from cloud");
    }
  }

  MissionPlan plan;
  plan.params = params;
  plan.spacing = plane_spacing(params.omega, params.alpha_deg, params.beta);

  const std::vector<Slice> slices =
      slice_structure(cloud, plan.spacing, params.z_start, params.z_end);
  std::vector<std::vector<Branch>> per_slice(slices.size());
  for (std::size_t s = 0; s < slices.size(); ++s) {
    plan.slice_levels.push_back(slices[s].level);
    if (!slices[s].points.empty()) {
      per_slice[s] = cluster_branches(slices[s], params.cluster_epsilon);
    }
  }
  link_branches(per_slice, 2.0 * plan.spacing);
  for (const auto& branches : per_slice) plan.branch_counts.push_back(static_cast<int>(branches.size()));

  const double step = params.v_d * params.t_s;
  std::vector<std::vector<ContourLoop>> loops(per_slice.size());
  std::vector<std::vector<double>> perims(per_slice.size());
  for (std::size_t s = 0; s < per_slice.size(); ++s) {
    for (const Branch& b : per_slice[s]) {
      loops[s].push_back(offset_contour(b, params.omega, step));
      perims[s].push_back(loops[s].back().perimeter());
    }
  }

  plan.assignment = assign_agents(per_slice, perims, params.n_agents, params.d_s);

  // Loop phase per branch id: the arc fraction where split 0 starts. It is
  // re-anchored each slice to the previous split-0 exit so the climb between
  // slices stays short, and it is shared by all agents on the loop so their
  // angular separation is preserved.
  std::map<int, Vec2> split0_exit;
  std::map<int, double> phase;  // arc position on the current slice's loop

  std::vector<std::vector<RoutePiece>> routes(params.n_agents);

  for (std::size_t s = 0; s < per_slice.size(); ++s) {
    // resolve phases for this slice
    for (std::size_t j = 0; j < per_slice[s].size(); ++j) {
      const Branch& b = per_slice[s][j];
      const auto exit_it = split0_exit.find(b.branch_id);
      phase[b.branch_id] =
          exit_it == split0_exit.end() ? 0.0 : loops[s][j].nearest_arc(exit_it->second);
    }

    for (const AssignmentEntry& e : plan.assignment) {
      if (e.slice_index != static_cast<int>(s)) continue;
      const ContourLoop& loop = loops[s][e.branch_local];
      const Branch& branch = per_slice[s][e.branch_local];
      const double P = loop.perimeter();
      const double s0 = phase[e.branch_id] + P * e.split_index / e.split_count;
      const double arc_len = P / e.split_count;

      RoutePiece arc;
      arc.loop = &loop;
      arc.branch = &branch;
      arc.s_start = s0;
      arc.s_len = arc_len;
      arc.slice_index = e.slice_index;
      arc.level = e.level;

      auto& route = routes[e.agent_id];
      if (!route.empty()) {
        const RoutePiece& last = route.back();
        const Vec2 from_xy = last.loop != nullptr
                                 ? last.loop->point_at(last.s_start + last.s_len)
                                 : Vec2(last.to.x(), last.to.y());
        const double from_z = last.loop != nullptr ? last.level : last.to.z();
        const Vec2 to_xy = loop.point_at(s0);
        RoutePiece hop;
        hop.from = Vec3(from_xy.x(), from_xy.y(), from_z);
        hop.to = Vec3(to_xy.x(), to_xy.y(), e.level);
        hop.yaw_from = last.loop != nullptr
                           ? yaw_reference(from_xy, *last.branch)
                           : last.yaw_to;
        hop.yaw_to = yaw_reference(to_xy, branch);
        hop.slice_index = -1;
        if (hop.length() > 1e-9) route.push_back(hop);
      }
      route.push_back(arc);

      if (e.split_index == 0) {
        split0_exit[e.branch_id] = loop.point_at(s0 + arc_len);
      }
    }
  }

  for (int a = 0; a < params.n_agents; ++a) {
    plan.paths.push_back(parameterize_route(a, routes[a], params.v_d, params.t_s));
    if (plan.paths.back().waypoints.empty()) {
      throw std::runtime_error("plan_mission: agent " + std::to_string(a) + " received no path");
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Files

void save_agent_path_csv(const AgentPath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write path file: " + file);
  out << "# format_version=1\n";
  out << "t,agent,x,y,z,yaw\n";
  char buf[160];
  for (const Waypoint& w : path.waypoints) {
    std::snprintf(buf, sizeof(buf), "%.6f,%d,%.6f,%.6f,%.6f,%.6f\n", w.t, path.agent_id,
                  w.position.x(), w.position.y(), w.position.z(), w.yaw);
    out << buf;
  }
}

AgentPath load_agent_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open path file: " + file);
  AgentPath path;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("t,agent", 0) != 0) {
        throw std::runtime_error(file + ": missing header at line " + std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    Waypoint w;
    int agent = 0;
    if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%lf,%lf", &w.t, &agent, &w.position.x(),
                    &w.position.y(), &w.position.z(), &w.yaw) != 6) {
      throw std::runtime_error(file + ": malformed row at line " + std::to_string(line_no));
    }
    path.agent_id = agent;
    path.waypoints.push_back(w);
  }
  if (path.waypoints.empty()) throw std::runtime_error(file + ": no waypoints");
  return path;
}

void save_plan_summary(const MissionPlan& plan, const std::string& file) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["plane_spacing"] = plan.spacing;
  j["slice_levels"] = plan.slice_levels;
  j["branch_counts"] = plan.branch_counts;
  auto agents = nlohmann::ordered_json::array();
  for (const AgentPath& p : plan.paths) {
    nlohmann::ordered_json a;
    a["agent"] = p.agent_id;
    a["duration"] = p.duration();
    a["path_length"] = p.path_length();
    a["waypoints"] = p.waypoints.size();
    agents.push_back(a);
  }
  j["agents"] = agents;
  auto table = nlohmann::ordered_json::array();
  for (const AssignmentEntry& e : plan.assignment) {
    nlohmann::ordered_json r;
    r["slice"] = e.slice_index;
    r["level"] = e.level;
    r["branch_id"] = e.branch_id;
    r["agent"] = e.agent_id;
    r["split_index"] = e.split_index;
    r["split_count"] = e.split_count;
    table.push_back(r);
  }
  j["assignment"] = table;
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write plan summary: " + file);
  out << j.dump(2) << "\n";
}

}  // namespace insp
