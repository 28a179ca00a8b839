#include "insp/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace insp {

namespace fs = std::filesystem;

namespace {

void ensure_output_dir(const MissionConfig& cfg) {
  fs::create_directories(cfg.output_dir);
}

std::string out_path(const MissionConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

CoverageSetup coverage_setup(const MissionConfig& cfg) {
  CoverageSetup setup;
  setup.alpha_deg = cfg.planner.alpha_deg;
  setup.r_max = cfg.planner.r_max;
  setup.band_lo = cfg.planner.z_start;
  setup.band_hi = cfg.planner.z_end;
  const double spacing = plane_spacing(cfg.planner.omega, cfg.planner.alpha_deg, cfg.planner.beta);
  const double half_fov = cfg.planner.omega * std::tan(deg2rad(cfg.planner.alpha_deg) / 2.0);
  setup.cap_lo = cfg.planner.z_start - half_fov;
  setup.cap_hi = cfg.planner.z_end + half_fov;
  setup.frame_rate = cfg.coverage_frame_rate;
  setup.plane_spacing = spacing;
  const int count = static_cast<int>(
      std::floor((cfg.planner.z_end - cfg.planner.z_start) / spacing + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) setup.slice_levels.push_back(cfg.planner.z_start + i * spacing);
  return setup;
}

void analyze_and_report(const MissionConfig& cfg, const std::vector<SimTrace>& traces,
                        const PointCloud& cloud, const SolidModel& solid) {
  const RmseSummary rmse = rmse_summary(traces);
  const CoverageReport coverage = coverage_report(traces, cloud, solid, coverage_setup(cfg));
  const SafetyAudit safety = safety_audit(traces, cfg.planner.d_s, cfg.planner.omega, solid);

  ReportInputs in;
  in.mission_name = cfg.name;
  in.seed = cfg.sim.seed;
  in.config_hash = cfg.hash;
  in.rmse = rmse;
  in.coverage = coverage;
  in.safety = safety;
  for (const SimTrace& tr : traces) in.traces.push_back(&tr);
  write_report(in, out_path(cfg, "report.json"), out_path(cfg, "coverage_histogram.csv"));

  std::printf("rmse tracking %.4f m, estimation %.4f m\n", rmse.tracking_overall,
              rmse.estimation_overall);
  std::printf("coverage %.2f%% of %zu band points, overlap %.2f%%\n",
              100.0 * coverage.covered_fraction, coverage.points_in_band,
              100.0 * coverage.overlap_fraction);
  std::printf("safety: min structure distance %.2f m", safety.min_structure_distance);
  if (traces.size() > 1) std::printf(", min inter-agent %.2f m", safety.min_inter_agent);
  std::printf(", %zu violations\n", safety.violations.size());
}

}  // namespace

std::string plan_file(const MissionConfig& cfg, int agent) {
  return out_path(cfg, "plan_agent" + std::to_string(agent) + ".csv");
}

std::string trace_file(const MissionConfig& cfg, int agent) {
  return out_path(cfg, "trace_agent" + std::to_string(agent) + ".csv");
}

std::pair<PointCloud, SolidModel> resolve_structure(const MissionConfig& cfg) {
  if (cfg.turbine_source) return generate_turbine(cfg.turbine);
  PointCloud cloud = load_point_cloud(cfg.cloud_path);
  return {std::move(cloud), SolidModel{}};
}

void cmd_generate(const MissionConfig& cfg) {
  auto [cloud, solid] = resolve_structure(cfg);
  ensure_output_dir(cfg);
  save_point_cloud(cloud, out_path(cfg, "cloud.xyz"));
  if (!solid.empty()) save_solid_model(solid, out_path(cfg, "solid.json"));
  std::printf("wrote %zu points to %s\n", cloud.size(), out_path(cfg, "cloud.xyz").c_str());
}

MissionPlan cmd_plan(const MissionConfig& cfg) {
  auto [cloud, solid] = resolve_structure(cfg);
  MissionPlan plan;
  try {
    plan = plan_mission(cloud, cfg.planner);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("planning failed: ") + e.what());
  }
  ensure_output_dir(cfg);
  for (const AgentPath& path : plan.paths) {
    save_agent_path_csv(path, plan_file(cfg, path.agent_id));
  }
  save_plan_summary(plan, out_path(cfg, "plan_summary.json"));
  for (const AgentPath& path : plan.paths) {
    std::printf("agent %d: duration %.1f s, path length %.1f m, %zu waypoints\n", path.agent_id,
                path.duration(), path.path_length(), path.waypoints.size());
  }
  return plan;
}

void cmd_simulate(const MissionConfig& cfg) {
  auto [cloud, solid] = resolve_structure(cfg);

  std::vector<AgentPath> paths;
  for (int a = 0; a < cfg.planner.n_agents; ++a) {
    const std::string file = plan_file(cfg, a);
    if (!fs::exists(file)) {
      throw std::runtime_error("plan file missing: " + file + " (run `inspect plan` first)");
    }
    paths.push_back(load_agent_path_csv(file));
  }

  const std::vector<SimTrace> traces = run_mission_paths(paths, cfg.anchors, solid, cfg.sim);

  ensure_output_dir(cfg);
  for (const SimTrace& tr : traces) save_trace_csv(tr, trace_file(cfg, tr.agent_id));

  // analyze what was written, so re-evaluation reproduces this report exactly
  std::vector<SimTrace> reloaded;
  for (const SimTrace& tr : traces) reloaded.push_back(load_trace_csv(trace_file(cfg, tr.agent_id)));
  for (std::size_t i = 0; i < reloaded.size(); ++i) {
    reloaded[i].agent_id = traces[i].agent_id;
  }
  analyze_and_report(cfg, reloaded, cloud, solid);
}

void cmd_evaluate(const MissionConfig& cfg) {
  auto [cloud, solid] = resolve_structure(cfg);
  std::vector<SimTrace> traces;
  for (int a = 0; a < cfg.planner.n_agents; ++a) {
    const std::string file = trace_file(cfg, a);
    if (!fs::exists(file)) {
      throw std::runtime_error("trace file missing: " + file + " (run `inspect simulate` first)");
    }
    traces.push_back(load_trace_csv(file));
    traces.back().agent_id = a;
  }
  ensure_output_dir(cfg);
  analyze_and_report(cfg, traces, cloud, solid);
}

}  // namespace insp
