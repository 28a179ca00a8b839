#include "insp/uwb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace insp {

void AnchorSet::validate() const {
  if (anchors.size() < 3) throw std::invalid_argument("anchor set: need at least 3 anchors");
  std::set<int> ids;
  for (const Anchor& a : anchors) {
    if (!ids.insert(a.id).second) throw std::invalid_argument("anchor set: duplicate anchor id");
    if (!a.position.allFinite()) throw std::invalid_argument("anchor set: non-finite position");
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      if ((anchors[i].position - anchors[j].position).norm() < 1e-9) {
        throw std::invalid_argument("anchor set: coincident anchor positions");
      }
    }
  }
  // collinearity: max distance of any anchor from the line through the two
  // most separated anchors
  std::size_t bi = 0, bj = 1;
  double best = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      const double d = (anchors[i].position - anchors[j].position).norm();
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  const Vec3 dir = (anchors[bj].position - anchors[bi].position).normalized();
  double off = 0.0;
  for (const Anchor& a : anchors) {
    const Vec3 rel = a.position - anchors[bi].position;
    off = std::max(off, (rel - rel.dot(dir) * dir).norm());
  }
  if (off < 1e-6) throw std::invalid_argument("anchor set: anchors are collinear");
}

const Anchor& AnchorSet::by_id(int id) const {
  for (const Anchor& a : anchors) {
    if (a.id == id) return a;
  }
  throw std::invalid_argument("unknown anchor id " + std::to_string(id));
}

Vec3 AnchorSet::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const Anchor& a : anchors) c += a.position;
  return c / static_cast<double>(anchors.size());
}

bool AnchorSet::coplanar_z(double tol) const {
  for (const Anchor& a : anchors) {
    if (std::abs(a.position.z() - anchors.front().position.z()) > tol) return false;
  }
  return true;
}

AnchorSet default_anchor_set() {
  AnchorSet set;
  set.anchors = {{1, {0.0, 0.0, 0.0}},
                 {2, {26.1, 0.0, 0.0}},
                 {3, {6.6, 24.8, 0.0}},
                 {4, {19.5, 18.2, 0.0}},
                 {5, {14.6, -21.7, 0.0}}};
  return set;
}

void UwbNoiseModel::validate() const {
  if (range_noise_std < 0.0) throw std::invalid_argument("uwb: range_noise_std must be >= 0");
  if (!(measurement_rate > 0.0)) throw std::invalid_argument("uwb: measurement_rate must be > 0");
  if (latency < 0.0) throw std::invalid_argument("uwb: latency must be >= 0");
}

std::optional<RangeMeasurement> simulate_ranging(const Anchor& anchor, const Vec3& tag_position,
                                                 double timestamp, const SolidModel& model,
                                                 const UwbNoiseModel& noise, RandomStream& rng) {
  // Draw the noise sample unconditionally so the stream advances the same
  // way whether or not this anchor is occluded.
  const double noise_sample = rng.gaussian(0.0, noise.range_noise_std);

  bool los = true;
  if (!model.empty() && (tag_position - anchor.position).squaredNorm() > 0.0) {
    los = line_of_sight(model, tag_position, anchor.position);
  }

  double range = (tag_position - anchor.position).norm() + noise_sample;
  if (!los) {
    if (noise.dropout_on_occlusion) return std::nullopt;
    range += noise.nlos_bias;
  }

  RangeMeasurement m;
  m.anchor_id = anchor.id;
  m.range = range;
  m.timestamp = timestamp;
  m.latency = noise.latency;
  return m;
}

TrilaterationResult trilaterate(const std::vector<RangeMeasurement>& ranges,
                                const AnchorSet& anchors) {
  // collect one range per distinct anchor (latest wins)
  std::vector<std::pair<Vec3, double>> obs;
  for (const RangeMeasurement& r : ranges) {
    const Anchor& a = anchors.by_id(r.anchor_id);
    bool found = false;
    for (auto& o : obs) {
      if ((o.first - a.position).norm() < 1e-12) {
        o.second = r.range;
        found = true;
      }
    }
    if (!found) obs.emplace_back(a.position, r.range);
  }
  if (obs.size() < 3) throw std::invalid_argument("trilaterate: need ranges from >= 3 distinct anchors");
  anchors.validate();

  const std::size_t n = obs.size();
  const bool coplanar = anchors.coplanar_z();
  const double plane_z = anchors.anchors.front().position.z();

  // Linearized closed form: subtracting the first sphere equation from the
  // others gives a linear system in the tag position.
  Eigen::MatrixXd A(n - 1, 3);
  Eigen::VectorXd b(n - 1);
  const Vec3 a0 = obs[0].first;
  const double r0 = obs[0].second;
  for (std::size_t i = 1; i < n; ++i) {
    const Vec3 ai = obs[i].first;
    const double ri = obs[i].second;
    A.row(i - 1) = 2.0 * (ai - a0).transpose();
    b(i - 1) = ai.squaredNorm() - a0.squaredNorm() - ri * ri + r0 * r0;
  }

  Vec3 guess;
  if (coplanar) {
    // z column is zero: solve in the plane and lift by the first sphere
    Eigen::MatrixXd A2 = A.leftCols<2>();
    Eigen::Vector2d xy = A2.colPivHouseholderQr().solve(b);
    const double horiz2 = (Vec2(xy.x(), xy.y()) - Vec2(a0.x(), a0.y())).squaredNorm();
    const double dz2 = r0 * r0 - horiz2;
    guess = Vec3(xy.x(), xy.y(), plane_z + std::sqrt(std::max(dz2, 0.0)));
  } else {
    guess = A.colPivHouseholderQr().solve(b);
  }

  // Gauss-Newton on the range residuals
  Vec3 x = guess;
  constexpr int kMaxIter = 50;
  int used_iters = kMaxIter;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    Eigen::MatrixXd J(n, 3);
    Eigen::VectorXd res(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 diff = x - obs[i].first;
      const double dist = diff.norm();
      if (dist < 1e-12) {
        J.row(i).setZero();
        res(i) = -obs[i].second;
      } else {
        J.row(i) = (diff / dist).transpose();
        res(i) = dist - obs[i].second;
      }
    }
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Vec3 g = J.transpose() * res;
    Eigen::LDLT<Eigen::Matrix3d> ldlt(JtJ);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("trilaterate: degenerate geometry (rank-deficient normal equations)");
    }
    const Vec3 step = ldlt.solve(g);
    x -= step;
    if (!x.allFinite()) throw std::runtime_error("trilaterate: diverged");
    if (step.norm() < 1e-12) {
      used_iters = iter + 1;
      break;
    }
    if (iter == kMaxIter - 1 && step.norm() > 1e-6) {
      throw std::runtime_error("trilaterate: no convergence after 50 iterations");
    }
  }

  if (coplanar && x.z() < plane_z) x.z() = 2.0 * plane_z - x.z();  // reject mirror solution

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = (x - obs[i].first).norm() - obs[i].second;
    ss += e * e;
  }

  TrilaterationResult out;
  out.position = x;
  out.residual_rms = std::sqrt(ss / static_cast<double>(n));
  out.iterations = used_iters;
  return out;
}

AnchorSet load_anchor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open anchor file: " + path);
  AnchorSet set;
  std::string line;
  bool in_section = false;
  int auto_id = 1;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string body = line.substr(first);
    if (body.front() == '[') {
      in_section = body.rfind("[anchors]", 0) == 0;
      continue;
    }
    if (!in_section) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) continue;
    std::string value = body.substr(eq + 1);
    double x, y, z;
    if (std::sscanf(value.c_str(), " [ %lf , %lf , %lf ]", &x, &y, &z) != 3) {
      throw std::runtime_error(path + ": malformed anchor entry: " + body);
    }
    set.anchors.push_back({auto_id++, Vec3(x, y, z)});
  }
  set.validate();
  return set;
}

std::vector<RangeMeasurement> load_range_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open range log: " + path);
  std::vector<RangeMeasurement> log;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen && line.rfind("t,", 0) == 0) {
      header_seen = true;
      continue;
    }
    RangeMeasurement m;
    if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf", &m.timestamp, &m.anchor_id, &m.range,
                    &m.latency) != 4) {
      throw std::runtime_error(path + ": malformed row at line " + std::to_string(line_no));
    }
    log.push_back(m);
  }
  return log;
}

void save_range_log(const std::vector<RangeMeasurement>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write range log: " + path);
  out << "# format_version=1\n";
  out << "t,anchor_id,range,latency\n";
  char buf[128];
  for (const RangeMeasurement& m : log) {
    std::snprintf(buf, sizeof(buf), "%.6f,%d,%.6f,%.6f\n", m.timestamp, m.anchor_id, m.range,
                  m.latency);
    out << buf;
  }
}

}  // namespace insp
