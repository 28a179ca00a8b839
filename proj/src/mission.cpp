#include "insp/mission.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace insp {

namespace {

int slice_index_of(double z, const std::vector<double>& levels, double spacing) {
  int best = -1;
  double best_d = spacing / 2.0 + 1e-9;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double d = std::abs(z - levels[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

struct PendingRange {
  double deliver_at = 0.0;
  RangeMeasurement meas;
};

SimTrace run_agent(const AgentPath& path, const AnchorSet& anchors, const SolidModel& solid,
                   const SimSetup& setup) {
  const double dt = 1.0 / setup.imu_rate;
  const auto& wps = path.waypoints;

  RandomStream rng_imu(derive_seed(setup.seed, "imu", path.agent_id));
  RandomStream rng_uwb(derive_seed(setup.seed, "uwb", path.agent_id));
  RandomStream rng_head(derive_seed(setup.seed, "heading", path.agent_id));
  RandomStream rng_bias(derive_seed(setup.seed, "bias", path.agent_id));
  WindSimulator wind_sim(setup.wind, derive_seed(setup.seed, "wind", path.agent_id));

  ImuNoiseParams imu_noise = setup.imu;
  imu_noise.accel_bias = rng_bias.gaussian_vec3(setup.estimator.init_accel_bias_std);
  imu_noise.gyro_bias = rng_bias.gaussian_vec3(setup.estimator.init_gyro_bias_std);

  VehicleState truth;
  truth.position = wps.front().position;
  truth.orientation = quat_from_yaw(wps.front().yaw);
  truth.acceleration = Vec3::Zero();

  Eskf filter(setup.estimator);
  bool filter_ready = false;
  std::vector<RangeMeasurement> init_ranges;

  PositionController controller(setup.controller, setup.vehicle);
  std::deque<PendingRange> pending;

  const int uwb_every = std::max(1, static_cast<int>(std::round(setup.imu_rate / setup.uwb.measurement_rate)));
  const int heading_every =
      std::max(1, static_cast<int>(std::round(setup.imu_rate / setup.heading_rate)));
  std::size_t anchor_rr = 0;

  auto measure_ranges = [&](double t) {
    if (setup.uwb.round_robin) {
      const Anchor& a = anchors.anchors[anchor_rr % anchors.anchors.size()];
      ++anchor_rr;
      auto m = simulate_ranging(a, truth.position, t, solid, setup.uwb, rng_uwb);
      if (m) pending.push_back({t + m->latency, *m});
    } else {
      for (const Anchor& a : anchors.anchors) {
        auto m = simulate_ranging(a, truth.position, t, solid, setup.uwb, rng_uwb);
        if (m) pending.push_back({t + m->latency, *m});
      }
    }
  };

  auto deliver_ranges = [&](double t) {
    while (!pending.empty() && pending.front().deliver_at <= t + 1e-12) {
      const RangeMeasurement m = pending.front().meas;
      pending.pop_front();
      if (filter_ready) {
        filter.process_range(m, anchors);
      } else {
        init_ranges.push_back(m);
        std::map<int, RangeMeasurement> latest;
        for (const auto& r : init_ranges) latest[r.anchor_id] = r;
        if (latest.size() >= 3) {
          std::vector<RangeMeasurement> fix_set;
          for (const auto& [id, r] : latest) fix_set.push_back(r);
          const auto fix = trilaterate(fix_set, anchors);
          double yaw0 = quat_yaw(truth.orientation);
          if (setup.heading_aid) {
            yaw0 = wrap_angle(yaw0 + rng_head.gaussian(0.0, setup.estimator.heading_noise_std));
          }
          filter.initialize(fix.position, yaw0, t);
          filter_ready = true;
        }
      }
    }
  };

  // --- static initialization window -------------------------------------
  const int warmup_ticks = static_cast<int>(std::round(setup.warmup * setup.imu_rate));
  for (int k = 0; k < warmup_ticks; ++k) {
    const double t = (k - warmup_ticks) * dt;
    const ImuSample imu = sample_imu(truth, imu_noise, dt, rng_imu);
    if (filter_ready) filter.propagate({t, imu.specific_force, imu.angular_rate}, dt);
    if (k % uwb_every == 0) measure_ranges(t);
    if (setup.heading_aid && k % heading_every == 0 && filter_ready) {
      filter.update_heading(
          wrap_angle(quat_yaw(truth.orientation) + rng_head.gaussian(0.0, setup.estimator.heading_noise_std)));
    }
    deliver_ranges(t);
  }
  if (!filter_ready) {
    throw std::runtime_error("run_mission: estimator never initialized (agent " +
                             std::to_string(path.agent_id) +
                             "); too few anchors in line of sight");
  }

  // --- mission ------------------------------------------------------------
  SimTrace trace;
  trace.agent_id = path.agent_id;
  trace.samples.reserve(wps.size());

  for (std::size_t k = 0; k < wps.size(); ++k) {
    const double t = wps[k].t;

    const ImuSample imu = sample_imu(truth, imu_noise, dt, rng_imu);
    filter.propagate({t, imu.specific_force, imu.angular_rate}, dt);
    if (k % uwb_every == 0) measure_ranges(t);
    deliver_ranges(t);
    if (setup.heading_aid && k % heading_every == 0) {
      filter.update_heading(
          wrap_angle(quat_yaw(truth.orientation) + rng_head.gaussian(0.0, setup.estimator.heading_noise_std)));
    }

    const NavState est = filter.state();
    if ((est.position - truth.position).norm() > setup.divergence_abort) {
      throw std::runtime_error("run_mission: estimator diverged (agent " +
                               std::to_string(path.agent_id) + " at t=" + std::to_string(t) +
                               ", error " +
                               std::to_string((est.position - truth.position).norm()) + " m)");
    }

    PositionReference ref;
    ref.position = wps[k].position;
    ref.yaw = wps[k].yaw;
    if (k + 1 < wps.size()) {
      const double step = wps[k + 1].t - wps[k].t;
      ref.velocity = (wps[k + 1].position - wps[k].position) / step;
      if (k + 2 < wps.size()) {
        const Vec3 v_next = (wps[k + 2].position - wps[k + 1].position) / step;
        ref.acceleration = (v_next - ref.velocity) / step;
      }
    }

    const ControlCommand cmd = controller.command(est.position, est.velocity, ref);

    TraceSample sample;
    sample.t = t;
    sample.reference = wps[k];
    sample.truth = truth;
    sample.estimate = est;
    sample.command = cmd;
    trace.samples.push_back(sample);

    const Vec3 wind = wind_sim.sample(dt, truth.position);
    truth = step_dynamics(truth, cmd, wind, dt, setup.vehicle);
  }
  return trace;
}

}  // namespace

std::vector<SimTrace> run_mission_paths(const std::vector<AgentPath>& paths,
                                        const AnchorSet& anchors, const SolidModel& solid,
                                        const SimSetup& setup) {
  anchors.validate();
  setup.uwb.validate();
  setup.wind.validate();
  if (paths.empty()) throw std::invalid_argument("run_mission: no agent paths");
  for (const AgentPath& p : paths) {
    if (p.waypoints.empty()) throw std::invalid_argument("run_mission: empty agent path");
  }
  std::vector<SimTrace> traces;
  traces.reserve(paths.size());
  // Agents are simulated in lockstep on the shared 100 Hz grid; they do not
  // interact, so running them one after another gives identical results.
  for (const AgentPath& p : paths) traces.push_back(run_agent(p, anchors, solid, setup));
  return traces;
}

std::vector<SimTrace> run_mission(const MissionPlan& plan, const AnchorSet& anchors,
                                  const SolidModel& solid, const SimSetup& setup) {
  if (std::abs(setup.imu_rate * plan.params.t_s - 1.0) > 1e-6) {
    throw std::invalid_argument("run_mission: imu_rate must equal 1 / planner t_s");
  }
  return run_mission_paths(plan.paths, anchors, solid, setup);
}

double tracking_rmse(const SimTrace& trace, RmseMode mode) {
  if (trace.samples.empty()) throw std::invalid_argument("tracking_rmse: empty trace");
  double acc = 0.0;
  for (const TraceSample& s : trace.samples) {
    const Vec3 e = mode == RmseMode::reference_vs_truth
                       ? (s.truth.position - s.reference.position).eval()
                       : (s.estimate.position - s.truth.position).eval();
    acc += e.squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(trace.samples.size()));
}

SafetyAudit safety_audit(const std::vector<SimTrace>& traces, double d_s, double omega,
                         const SolidModel& solid) {
  if (traces.empty()) throw std::invalid_argument("safety_audit: no traces");
  const std::size_t n = traces.front().samples.size();
  for (const SimTrace& tr : traces) {
    if (tr.samples.size() != n) {
      throw std::invalid_argument("safety_audit: traces have mismatched timelines");
    }
  }

  SafetyAudit audit;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = traces.front().samples[k].t;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const Vec3 pi = traces[i].samples[k].truth.position;
      if (!solid.empty()) {
        const double ds = solid.outside_distance(pi);
        audit.min_structure_distance = std::min(audit.min_structure_distance, ds);
        if (ds < omega / 2.0) audit.violations.push_back({t, "structure", ds});
      }
      for (std::size_t j = i + 1; j < traces.size(); ++j) {
        const double dij = (pi - traces[j].samples[k].truth.position).norm();
        audit.min_inter_agent = std::min(audit.min_inter_agent, dij);
        if (dij < d_s) audit.violations.push_back({t, "inter_agent", dij});
      }
    }
  }
  return audit;
}

CoverageReport coverage_report(const std::vector<SimTrace>& traces, const PointCloud& cloud,
                               const SolidModel& solid, const CoverageSetup& setup) {
  if (traces.empty()) throw std::invalid_argument("coverage_report: no traces");

  const double lo = std::max(setup.band_lo, setup.cap_lo);
  const double hi = std::min(setup.band_hi, setup.cap_hi);
  const double cos_half = std::cos(deg2rad(setup.alpha_deg) / 2.0);
  const double r2 = setup.r_max * setup.r_max;

  CoverageReport report;
  report.view_counts.assign(cloud.size(), -1);
  std::vector<std::uint32_t> slice_mask(cloud.size(), 0);
  std::vector<std::size_t> band_idx;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.points[i].z() >= lo - 1e-9 && cloud.points[i].z() <= hi + 1e-9) {
      report.view_counts[i] = 0;
      band_idx.push_back(i);
    }
  }
  report.points_in_band = band_idx.size();
  if (band_idx.empty()) return report;

  for (const SimTrace& trace : traces) {
    if (trace.samples.empty()) continue;
    const double dt = trace.samples.size() > 1
                          ? trace.samples[1].t - trace.samples[0].t
                          : 1.0;
    const int stride = std::max(1, static_cast<int>(std::round(1.0 / (setup.frame_rate * dt))));
    for (std::size_t k = 0; k < trace.samples.size(); k += stride) {
      const TraceSample& s = trace.samples[k];
      const Vec3 cam = s.truth.position;
      const Vec3 axis = s.truth.orientation * Vec3::UnitX();
      const int slice = slice_index_of(s.reference.position.z(), setup.slice_levels,
                                       setup.plane_spacing);
      for (std::size_t i : band_idx) {
        const Vec3 d = cloud.points[i] - cam;
        const double dist2 = d.squaredNorm();
        if (dist2 > r2 || dist2 == 0.0) continue;
        if (d.dot(axis) < cos_half * std::sqrt(dist2)) continue;
        if (!solid.empty() && !line_of_sight(solid, cam, cloud.points[i])) continue;
        ++report.view_counts[i];
        if (slice >= 0 && slice < 32) slice_mask[i] |= (1u << slice);
      }
    }
  }

  std::size_t covered = 0, overlapped = 0;
  for (std::size_t i : band_idx) {
    if (report.view_counts[i] > 0) {
      ++covered;
      std::uint32_t m = slice_mask[i];
      int slices_seen = 0;
      while (m != 0) {
        slices_seen += static_cast<int>(m & 1u);
        m >>= 1;
      }
      if (slices_seen >= 2) ++overlapped;
    } else {
      report.uncovered.push_back(i);
    }
  }
  report.covered_fraction = static_cast<double>(covered) / static_cast<double>(band_idx.size());
  report.overlap_fraction = static_cast<double>(overlapped) / static_cast<double>(band_idx.size());
  return report;
}

RmseSummary rmse_summary(const std::vector<SimTrace>& traces) {
  RmseSummary out;
  double track_ss = 0.0, est_ss = 0.0;
  std::size_t count = 0;
  for (const SimTrace& tr : traces) {
    out.tracking_per_agent.push_back(tracking_rmse(tr, RmseMode::reference_vs_truth));
    out.estimation_per_agent.push_back(tracking_rmse(tr, RmseMode::truth_vs_estimate));
    for (const TraceSample& s : tr.samples) {
      track_ss += (s.truth.position - s.reference.position).squaredNorm();
      est_ss += (s.estimate.position - s.truth.position).squaredNorm();
      ++count;
    }
  }
  out.tracking_overall = std::sqrt(track_ss / static_cast<double>(count));
  out.estimation_overall = std::sqrt(est_ss / static_cast<double>(count));
  return out;
}

void save_trace_csv(const SimTrace& trace, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write trace file: " + file);
  out << "# format_version=1\n";
  out << "t,ref_x,ref_y,ref_z,ref_yaw,true_x,true_y,true_z,true_qw,true_qx,true_qy,true_qz,"
         "est_x,est_y,est_z,err\n";
  char buf[512];
  for (const TraceSample& s : trace.samples) {
    const double err = (s.truth.position - s.reference.position).norm();
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.9f,%.9f,%.9f,%.9f,%.6f,%.6f,%.6f,%.6f\n",
                  s.t, s.reference.position.x(), s.reference.position.y(),
                  s.reference.position.z(), s.reference.yaw, s.truth.position.x(),
                  s.truth.position.y(), s.truth.position.z(), s.truth.orientation.w(),
                  s.truth.orientation.x(), s.truth.orientation.y(), s.truth.orientation.z(),
                  s.estimate.position.x(), s.estimate.position.y(), s.estimate.position.z(), err);
    out << buf;
  }
}

SimTrace load_trace_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open trace file: " + file);
  SimTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("t,ref_x", 0) != 0) {
        throw std::runtime_error(file + ": missing trace header at line " + std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    TraceSample s;
    double qw, qx, qy, qz, err;
    if (std::sscanf(line.c_str(),
                    "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &s.t,
                    &s.reference.position.x(), &s.reference.position.y(),
                    &s.reference.position.z(), &s.reference.yaw, &s.truth.position.x(),
                    &s.truth.position.y(), &s.truth.position.z(), &qw, &qx, &qy, &qz,
                    &s.estimate.position.x(), &s.estimate.position.y(), &s.estimate.position.z(),
                    &err) != 16) {
      throw std::runtime_error(file + ": malformed trace row at line " + std::to_string(line_no));
    }
    s.reference.t = s.t;
    s.truth.orientation = Quat(qw, qx, qy, qz).normalized();
    s.truth.timestamp = s.t;
    s.estimate.timestamp = s.t;
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw std::runtime_error(file + ": no samples");
  return trace;
}

void write_report(const ReportInputs& in, const std::string& report_file,
                  const std::string& histogram_file) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["mission"] = in.mission_name;
  j["seed"] = in.seed;
  j["config_hash"] = in.config_hash;

  auto agents = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < in.traces.size(); ++i) {
    nlohmann::ordered_json a;
    a["id"] = in.traces[i]->agent_id;
    a["samples"] = in.traces[i]->samples.size();
    a["duration"] = in.traces[i]->samples.empty() ? 0.0 : in.traces[i]->samples.back().t;
    a["rmse_tracking"] = in.rmse.tracking_per_agent[i];
    a["rmse_estimation"] = in.rmse.estimation_per_agent[i];
    agents.push_back(a);
  }
  j["agents"] = agents;

  j["rmse"]["tracking_overall"] = in.rmse.tracking_overall;
  j["rmse"]["estimation_overall"] = in.rmse.estimation_overall;

  j["coverage"]["points_in_band"] = in.coverage.points_in_band;
  j["coverage"]["covered_fraction"] = in.coverage.covered_fraction;
  j["coverage"]["overlap_fraction"] = in.coverage.overlap_fraction;
  j["coverage"]["uncovered_count"] = in.coverage.uncovered.size();

  const bool has_pairs = in.traces.size() > 1;
  if (has_pairs) {
    j["safety"]["min_inter_agent"] = in.safety.min_inter_agent;
  } else {
    j["safety"]["min_inter_agent"] = nullptr;
  }
  j["safety"]["min_structure_distance"] = in.safety.min_structure_distance;
  auto violations = nlohmann::ordered_json::array();
  for (const SafetyViolation& v : in.safety.violations) {
    nlohmann::ordered_json e;
    e["t"] = v.t;
    e["kind"] = v.kind;
    e["value"] = v.value;
    violations.push_back(e);
  }
  j["safety"]["violations"] = violations;

  std::ofstream out(report_file);
  if (!out) throw std::runtime_error("cannot write report: " + report_file);
  out << j.dump(2) << "\n";

  // view-count histogram over band points
  std::map<int, std::size_t> hist;
  for (std::size_t i = 0; i < in.coverage.view_counts.size(); ++i) {
    if (in.coverage.view_counts[i] >= 0) ++hist[in.coverage.view_counts[i]];
  }
  std::ofstream hout(histogram_file);
  if (!hout) throw std::runtime_error("cannot write histogram: " + histogram_file);
  hout << "# format_version=1\n";
  hout << "views,point_count\n";
  for (const auto& [views, cnt] : hist) hout << views << "," << cnt << "\n";
}

}  // namespace insp
