#pragma once

#include <optional>
#include <string>
#include <vector>

#include "insp/geometry.hpp"
#include "insp/rng.hpp"
#include "insp/solid.hpp"

namespace insp {

struct Anchor {
  int id = 0;
  Vec3 position = Vec3::Zero();
};

/// Fixed ranging references. At least 3, pairwise distinct, not all
/// collinear.
struct AnchorSet {
  std::vector<Anchor> anchors;

  void validate() const;
  const Anchor& by_id(int id) const;
  Vec3 centroid() const;
  /// True when all anchors share one z (mirror-ambiguous geometry).
  bool coplanar_z(double tol = 1e-9) const;
};

/// The five-anchor layout used around the inspected turbine.
AnchorSet default_anchor_set();

struct RangeMeasurement {
  int anchor_id = 0;
  double range = 0.0;    // m
  double timestamp = 0.0;
  double latency = 0.0;  // age when delivered, s
};

struct UwbNoiseModel {
  double range_noise_std = 0.1;      // m
  bool dropout_on_occlusion = true;  // no measurement when the structure blocks
  double nlos_bias = 0.0;            // added instead of dropping, m
  double measurement_rate = 20.0;    // aggregate Hz
  bool round_robin = true;           // one anchor per tick
  double latency = 0.0;              // delivery delay, s

  void validate() const;
};

/// One simulated two-way range: true distance plus Gaussian noise; occluded
/// anchors either drop out or come back with the NLOS bias. Deterministic
/// for a given stream state.
std::optional<RangeMeasurement> simulate_ranging(const Anchor& anchor, const Vec3& tag_position,
                                                 double timestamp, const SolidModel& model,
                                                 const UwbNoiseModel& noise, RandomStream& rng);

struct TrilaterationResult {
  Vec3 position = Vec3::Zero();
  double residual_rms = 0.0;
  int iterations = 0;
};

/// Nonlinear least-squares position fix from >= 3 ranges: linearized
/// closed-form initial guess refined by Gauss-Newton. For coplanar anchor
/// sets the solution in the half-space above the anchor plane is returned.
/// Throws on < 3 distinct anchors, collinear geometry or divergence.
TrilaterationResult trilaterate(const std::vector<RangeMeasurement>& ranges,
                                const AnchorSet& anchors);

/// Anchor file: TOML-style [anchors] section, `aN = [x, y, z]` per anchor.
AnchorSet load_anchor_file(const std::string& path);

/// Range-log replay rows: `t,anchor_id,range,latency`.
std::vector<RangeMeasurement> load_range_log(const std::string& path);
void save_range_log(const std::vector<RangeMeasurement>& log, const std::string& path);

}  // namespace insp
