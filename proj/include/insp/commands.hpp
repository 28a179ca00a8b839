#pragma once

#include <string>
#include <vector>

#include "insp/config.hpp"

namespace insp {

/// Resolve the structure model: generate the turbine from the spec or load
/// the configured cloud (no occlusion solid in that case).
std::pair<PointCloud, SolidModel> resolve_structure(const MissionConfig& cfg);

/// Write cloud.xyz (and solid.json for generated turbines) to the output
/// directory.
void cmd_generate(const MissionConfig& cfg);

/// Plan the mission and write plan_agent<i>.csv plus plan_summary.json.
MissionPlan cmd_plan(const MissionConfig& cfg);

/// Simulate previously planned trajectories (plan_agent<i>.csv must exist),
/// write trace_agent<i>.csv, report.json and coverage_histogram.csv, and
/// print the RMSE / coverage summary.
void cmd_simulate(const MissionConfig& cfg);

/// Re-run the analysis stage on existing trace files.
void cmd_evaluate(const MissionConfig& cfg);

std::string plan_file(const MissionConfig& cfg, int agent);
std::string trace_file(const MissionConfig& cfg, int agent);

}  // namespace insp
