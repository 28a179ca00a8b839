#include "insp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace insp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

ConfigValue parse_value(const std::string& raw, const std::string& path, std::size_t line_no) {
  ConfigValue v;
  v.raw = raw;
  v.line = line_no;
  if (raw.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty value");

  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unterminated string");
    }
    v.kind = ConfigValue::Kind::text;
    v.text = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unterminated array");
    }
    v.kind = ConfigValue::Kind::array;
    std::string inner = raw.substr(1, raw.size() - 2);
    std::replace(inner.begin(), inner.end(), ',', ' ');
    std::istringstream ss(inner);
    double x;
    while (ss >> x) v.array.push_back(x);
    if (!ss.eof()) throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed array");
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.boolean = raw == "true";
    return v;
  }
  try {
    std::size_t used = 0;
    v.number = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError(path + ":" + std::to_string(line_no) + ": cannot parse value '" + raw + "'");
  }
  v.kind = ConfigValue::Kind::number;
  return v;
}

}  // namespace

const ConfigFile::Section* ConfigFile::section(const std::string& name) const {
  for (const auto& [sec, entries] : sections) {
    if (sec == name) return &entries;
  }
  return nullptr;
}

const ConfigValue* ConfigFile::find(const std::string& section_name, const std::string& key) const {
  const Section* sec = section(section_name);
  if (sec == nullptr) return nullptr;
  for (const auto& [k, v] : *sec) {
    if (k == key) return &v;
  }
  return nullptr;
}

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  ConfigFile file;
  file.sections.push_back({"", {}});  // top-level keys
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments (quotes never contain '#' in this format)
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty section name");
      file.sections.push_back({name, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    auto& entries = file.sections.back().second;
    for (const auto& [k, v] : entries) {
      if (k == key) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
      }
    }
    entries.emplace_back(key, parse_value(raw, path, line_no));
  }
  return file;
}

std::string config_hash(const ConfigFile& file) {
  std::vector<std::string> rows;
  for (const auto& [sec, entries] : file.sections) {
    for (const auto& [key, value] : entries) {
      rows.push_back(sec + "." + key + "=" + value.raw);
    }
  }
  std::sort(rows.begin(), rows.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string& row : rows) {
    for (char c : row) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

class SectionReader {
 public:
  SectionReader(const ConfigFile& file, const std::string& path, const std::string& name)
      : file_(file), path_(path), name_(name) {}

  bool present() const { return file_.section(name_) != nullptr; }

  double number(const std::string& key, double fallback) {
    const ConfigValue* v = get(key);
    if (v == nullptr) return fallback;
    require(v, ConfigValue::Kind::number, key);
    return v->number;
  }
  int integer(const std::string& key, int fallback) {
    const double d = number(key, fallback);
    if (std::abs(d - std::round(d)) > 1e-9) {
      throw ConfigError(path_ + ": [" + name_ + "] " + key + " must be an integer");
    }
    return static_cast<int>(std::llround(d));
  }
  bool boolean(const std::string& key, bool fallback) {
    const ConfigValue* v = get(key);
    if (v == nullptr) return fallback;
    require(v, ConfigValue::Kind::boolean, key);
    return v->boolean;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const ConfigValue* v = get(key);
    if (v == nullptr) return fallback;
    require(v, ConfigValue::Kind::text, key);
    return v->text;
  }
  std::vector<double> array(const std::string& key, std::size_t arity) {
    const ConfigValue* v = get(key);
    if (v == nullptr) return {};
    require(v, ConfigValue::Kind::array, key);
    if (arity != 0 && v->array.size() != arity) {
      throw ConfigError(path_ + ": [" + name_ + "] " + key + " must have " +
                        std::to_string(arity) + " elements");
    }
    return v->array;
  }

  /// After reading, every present key must have been consumed.
  void reject_unknown() const {
    const ConfigFile::Section* sec = file_.section(name_);
    if (sec == nullptr) return;
    for (const auto& [key, value] : *sec) {
      if (consumed_.count(key) == 0) {
        throw ConfigError(path_ + ":" + std::to_string(value.line) + ": unknown key '" + key +
                          "' in section [" + name_ + "]");
      }
    }
  }

 private:
  const ConfigValue* get(const std::string& key) {
    consumed_.insert(key);
    return file_.find(name_, key);
  }
  void require(const ConfigValue* v, ConfigValue::Kind kind, const std::string& key) const {
    if (v->kind != kind) {
      throw ConfigError(path_ + ":" + std::to_string(v->line) + ": wrong type for '" + key + "'");
    }
  }

  const ConfigFile& file_;
  std::string path_;
  std::string name_;
  std::set<std::string> consumed_;
};

}  // namespace

MissionConfig load_mission_config(const std::string& path,
                                  std::optional<std::uint64_t> seed_override,
                                  std::optional<std::string> out_override) {
  ConfigFile file = parse_config_file(path);

  static const std::set<std::string> kKnownSections = {
      "", "structure", "planner", "anchors", "uwb", "vehicle", "wind", "sim", "output"};
  for (const auto& [sec, entries] : file.sections) {
    if (kKnownSections.count(sec) == 0) {
      throw ConfigError(path + ": unknown section [" + sec + "]");
    }
  }
  for (const std::string required : {"structure", "planner", "anchors"}) {
    if (file.section(required) == nullptr) {
      throw ConfigError(path + ": missing required section [" + required + "]");
    }
  }

  MissionConfig cfg;
  cfg.source_path = path;
  cfg.name = std::filesystem::path(path).stem().string();

  {
    SectionReader top(file, path, "");
    top.integer("format_version", 1);
    top.reject_unknown();
  }

  {
    SectionReader s(file, path, "structure");
    const std::string source = s.text("source", "turbine");
    if (source == "turbine") {
      cfg.turbine_source = true;
      TurbineSpec& t = cfg.turbine;
      t.tower_base_diameter = s.number("tower_base_diameter", t.tower_base_diameter);
      t.tower_top_diameter = s.number("tower_top_diameter", t.tower_top_diameter);
      t.tower_height = s.number("tower_height", t.tower_height);
      t.blade_length = s.number("blade_length", t.blade_length);
      t.blade_root_chord = s.number("blade_root_chord", t.blade_root_chord);
      t.blade_tip_chord = s.number("blade_tip_chord", t.blade_tip_chord);
      t.hub_length = s.number("hub_length", t.hub_length);
      t.surface_sample_spacing = s.number("sample_spacing", t.surface_sample_spacing);
      const auto az = s.array("rotor_azimuth_deg", 3);
      if (!az.empty()) std::copy(az.begin(), az.end(), t.rotor_azimuth_deg.begin());
      t.validate();
    } else if (source == "cloud") {
      cfg.turbine_source = false;
      cfg.cloud_path = s.text("cloud_path", "");
      if (cfg.cloud_path.empty()) {
        throw ConfigError(path + ": [structure] cloud_path required when source = \"cloud\"");
      }
    } else {
      throw ConfigError(path + ": [structure] source must be \"turbine\" or \"cloud\"");
    }
    s.reject_unknown();
  }

  {
    SectionReader s(file, path, "planner");
    PlannerParams& p = cfg.planner;
    p.n_agents = s.integer("n_agents", p.n_agents);
    p.omega = s.number("omega", p.omega);
    p.alpha_deg = s.number("alpha_deg", p.alpha_deg);
    p.beta = s.number("beta", p.beta);
    p.r_max = s.number("r_max", p.r_max);
    p.v_d = s.number("v_d", p.v_d);
    p.t_s = s.number("t_s", p.t_s);
    p.d_s = s.number("d_s", p.d_s);
    p.z_start = s.number("z_start", p.z_start);
    p.z_end = s.number("z_end", p.z_end);
    p.cluster_epsilon = s.number("cluster_epsilon", p.cluster_epsilon);
    p.validate();
    s.reject_unknown();
  }

  {
    const ConfigFile::Section* sec = file.section("anchors");
    int id = 1;
    for (const auto& [key, value] : *sec) {
      if (value.kind != ConfigValue::Kind::array || value.array.size() != 3) {
        throw ConfigError(path + ":" + std::to_string(value.line) + ": anchor '" + key +
                          "' must be [x, y, z]");
      }
      cfg.anchors.anchors.push_back({id++, Vec3(value.array[0], value.array[1], value.array[2])});
    }
    cfg.anchors.validate();
  }

  {
    SectionReader s(file, path, "uwb");
    UwbNoiseModel& u = cfg.sim.uwb;
    u.range_noise_std = s.number("range_noise_std", u.range_noise_std);
    u.dropout_on_occlusion = s.boolean("dropout_on_occlusion", u.dropout_on_occlusion);
    u.nlos_bias = s.number("nlos_bias", u.nlos_bias);
    u.measurement_rate = s.number("rate", u.measurement_rate);
    u.round_robin = s.boolean("round_robin", u.round_robin);
    u.latency = s.number("latency", u.latency);
    u.validate();
    s.reject_unknown();
    cfg.sim.estimator.range_noise_std = u.range_noise_std > 0.0 ? u.range_noise_std : 0.01;
  }

  {
    SectionReader s(file, path, "vehicle");
    MavParams& v = cfg.sim.vehicle;
    v.mass = s.number("mass", v.mass);
    v.drag_coefficient = s.number("drag_coefficient", v.drag_coefficient);
    v.attitude_time_constant = s.number("attitude_time_constant", v.attitude_time_constant);
    v.max_thrust_factor = s.number("max_thrust_factor", v.max_thrust_factor);
    v.min_thrust_factor = s.number("min_thrust_factor", v.min_thrust_factor);
    v.validate();
    ControllerParams& c = cfg.sim.controller;
    c.position_weight = s.number("position_weight", c.position_weight);
    c.velocity_weight = s.number("velocity_weight", c.velocity_weight);
    c.jerk_weight = s.number("jerk_weight", c.jerk_weight);
    c.horizon = s.number("mpc_horizon", c.horizon);
    c.max_tilt_deg = s.number("max_tilt_deg", c.max_tilt_deg);
    c.t_s = cfg.planner.t_s;
    c.validate();
    s.reject_unknown();
  }

  {
    SectionReader s(file, path, "wind");
    WindModel& w = cfg.sim.wind;
    const auto mean = s.array("mean", 3);
    if (!mean.empty()) w.mean_wind = Vec3(mean[0], mean[1], mean[2]);
    w.gust_std = s.number("gust_std", w.gust_std);
    w.gust_time_constant = s.number("gust_time_constant", w.gust_time_constant);
    w.max_speed = s.number("max_speed", w.max_speed);
    w.proximity_gust_factor = s.number("proximity_gust_factor", w.proximity_gust_factor);
    w.proximity_radius = s.number("proximity_radius", w.proximity_radius);
    w.validate();
    s.reject_unknown();
  }

  {
    SectionReader s(file, path, "sim");
    const ConfigValue* seed_val = file.find("sim", "seed");
    if (seed_val != nullptr) {
      s.number("seed", 1.0);  // consume
      if (seed_val->number < 0 || std::abs(seed_val->number - std::round(seed_val->number)) > 1e-9) {
        throw ConfigError(path + ": [sim] seed must be a non-negative integer");
      }
      cfg.sim.seed = static_cast<std::uint64_t>(std::llround(seed_val->number));
    }
    cfg.sim.imu_rate = s.number("imu_rate", cfg.sim.imu_rate);
    cfg.sim.warmup = s.number("warmup", cfg.sim.warmup);
    cfg.sim.heading_aid = s.boolean("heading_aid", cfg.sim.heading_aid);
    cfg.sim.heading_rate = s.number("heading_rate", cfg.sim.heading_rate);
    cfg.sim.estimator.heading_noise_std = deg2rad(s.number("heading_noise_deg", 2.0));
    cfg.sim.imu.accel_noise_density = s.number("accel_noise_density", cfg.sim.imu.accel_noise_density);
    cfg.sim.imu.gyro_noise_density = s.number("gyro_noise_density", cfg.sim.imu.gyro_noise_density);
    cfg.sim.estimator.accel_noise_density = cfg.sim.imu.accel_noise_density;
    cfg.sim.estimator.gyro_noise_density = cfg.sim.imu.gyro_noise_density;
    cfg.sim.estimator.buffer_horizon = s.number("buffer_horizon", cfg.sim.estimator.buffer_horizon);
    cfg.coverage_frame_rate = s.number("coverage_frame_rate", cfg.coverage_frame_rate);
    if (std::abs(cfg.sim.imu_rate * cfg.planner.t_s - 1.0) > 1e-6) {
      throw ConfigError(path + ": [sim] imu_rate must equal 1 / planner t_s");
    }
    s.reject_unknown();
  }

  {
    SectionReader s(file, path, "output");
    cfg.output_dir = s.text("dir", cfg.output_dir);
    s.reject_unknown();
  }

  if (seed_override) {
    cfg.sim.seed = *seed_override;
    // reflect the effective seed in the hash input
    for (auto& [sec, entries] : file.sections) {
      if (sec != "sim") continue;
      for (auto& [key, value] : entries) {
        if (key == "seed") value.raw = std::to_string(*seed_override);
      }
    }
    if (file.find("sim", "seed") == nullptr) {
      ConfigValue v;
      v.raw = std::to_string(*seed_override);
      bool placed = false;
      for (auto& [sec, entries] : file.sections) {
        if (sec == "sim") {
          entries.emplace_back("seed", v);
          placed = true;
        }
      }
      if (!placed) file.sections.push_back({"sim", {{"seed", v}}});
    }
  }
  if (out_override) cfg.output_dir = *out_override;

  cfg.hash = config_hash(file);
  return cfg;
}

}  // namespace insp
