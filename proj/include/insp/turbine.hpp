#pragma once

#include <array>
#include <utility>

#include "insp/point_cloud.hpp"
#include "insp/solid.hpp"

namespace insp {

/// Wind-turbine dimensions. Defaults follow the inspected plant: 64 m tower
/// tapering 4.5 m -> 1.5 m, three 22 m blades with 2 m root / 0.2 m tip
/// chord, 4 m hub and nacelle, rotor locked in a star position.
struct TurbineSpec {
  double tower_base_diameter = 4.5;  // m
  double tower_top_diameter = 1.5;   // m
  double tower_height = 64.0;        // m
  double blade_length = 22.0;        // m
  double blade_root_chord = 2.0;     // m
  double blade_tip_chord = 0.2;      // m
  double hub_length = 4.0;           // m
  // Blade directions in the rotor plane, degrees; 90 = straight up.
  std::array<double, 3> rotor_azimuth_deg{90.0, 210.0, 330.0};
  double surface_sample_spacing = 0.15;  // m

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Rotor hub center: front of the nacelle, at tower-top height.
  Vec3 hub_center() const { return Vec3(hub_length / 2.0, 0.0, tower_height); }
};

/// Build the surface-sampled cloud and the matching convex-primitive solid.
/// Tower axis is the world z-axis; the rotor plane is the vertical plane
/// through the hub center with normal +x.
std::pair<PointCloud, SolidModel> generate_turbine(const TurbineSpec& spec);

}  // namespace insp
