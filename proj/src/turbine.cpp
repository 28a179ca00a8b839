#include "insp/turbine.hpp"

#include <cmath>
#include <stdexcept>

namespace insp {

void TurbineSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("turbine spec: ") + name + " must be > 0");
    }
  };
  positive(tower_base_diameter, "tower_base_diameter");
  positive(tower_top_diameter, "tower_top_diameter");
  positive(tower_height, "tower_height");
  positive(blade_length, "blade_length");
  positive(blade_root_chord, "blade_root_chord");
  positive(blade_tip_chord, "blade_tip_chord");
  positive(hub_length, "hub_length");
  positive(surface_sample_spacing, "surface_sample_spacing");

  if (tower_base_diameter < tower_top_diameter) {
    throw std::invalid_argument("turbine spec: tower_base_diameter must be >= tower_top_diameter");
  }
  if (!(surface_sample_spacing < blade_tip_chord)) {
    throw std::invalid_argument("turbine spec: surface_sample_spacing must be < blade_tip_chord");
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      double diff = std::fmod(rotor_azimuth_deg[i] - rotor_azimuth_deg[j], 360.0);
      if (diff < 0.0) diff += 360.0;
      if (diff < 1e-9 || diff > 360.0 - 1e-9) {
        throw std::invalid_argument("turbine spec: rotor azimuth angles must be pairwise distinct");
      }
    }
  }
}

std::pair<PointCloud, SolidModel> generate_turbine(const TurbineSpec& spec) {
  spec.validate();

  SolidModel solid;

  TaperedCylinder tower;
  tower.center = Vec2(0.0, 0.0);
  tower.z0 = 0.0;
  tower.z1 = spec.tower_height;
  tower.r0 = spec.tower_base_diameter / 2.0;
  tower.r1 = spec.tower_top_diameter / 2.0;
  solid.primitives.emplace_back(tower);

  // Nacelle: box along +x, square section matching the tower top, rotor
  // hub at its front face.
  const double nacelle_side = spec.tower_top_diameter;
  TaperedSlab nacelle;
  nacelle.origin = Vec3(-spec.hub_length / 2.0, 0.0, spec.tower_height);
  nacelle.axis = Vec3::UnitX();
  nacelle.width_dir = Vec3::UnitY();
  nacelle.length = spec.hub_length;
  nacelle.width0 = nacelle.width1 = nacelle_side;
  nacelle.thick0 = nacelle.thick1 = nacelle_side;
  solid.primitives.emplace_back(nacelle);

  // Blades: tapered slabs in the rotor plane (x = hub_length / 2), chord in
  // plane, thickness 0.1 x local chord along the rotor axis.
  const Vec3 hub = spec.hub_center();
  for (double az_deg : spec.rotor_azimuth_deg) {
    const double az = deg2rad(az_deg);
    const Vec3 dir(0.0, std::cos(az), std::sin(az));
    TaperedSlab blade;
    blade.origin = hub;
    blade.axis = dir;
    blade.width_dir = Vec3(0.0, -std::sin(az), std::cos(az));
    blade.length = spec.blade_length;
    blade.width0 = spec.blade_root_chord;
    blade.width1 = spec.blade_tip_chord;
    blade.thick0 = 0.1 * spec.blade_root_chord;
    blade.thick1 = 0.1 * spec.blade_tip_chord;
    solid.primitives.emplace_back(blade);
  }

  PointCloud cloud = solid.sample_surfaces(spec.surface_sample_spacing);
  return {std::move(cloud), std::move(solid)};
}

}  // namespace insp
