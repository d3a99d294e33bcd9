#ifndef V2XNOISE_CONFIG_HPP
#define V2XNOISE_CONFIG_HPP

#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "v2xnoise/errors.hpp"
#include "v2xnoise/io/manifest.hpp"
#include "v2xnoise/noise.hpp"

namespace v2xnoise {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

inline const std::set<std::string>& known_noise_kinds() {
  static const std::set<std::string> kinds = {
      "calibration_error",      "vibration",  "perspective_distortion",
      "motion_distortion",      "time_desync", "systematic_error"};
  return kinds;
}

/// Full corruption recipe: which noise kinds apply to which agent/sensor
/// kind, plus every generator parameter. The defaults reproduce the
/// standard recipe: vehicles get LiDAR motion distortion, calibration error
/// and time desync; infrastructure gets vibration on LiDAR and camera,
/// systematic error, perspective distortion, calibration error and time
/// desync.
struct RunConfig {
  std::uint64_t root_seed = 0;

  // enabled[agent_kind][sensor_kind]
  std::array<std::array<std::set<std::string>, 2>, 2> enabled;

  CalibrationNoiseSpec calibration;
  VibrationSpec vibration;
  PerspectiveDistortionSpec perspective =
      PerspectiveDistortionSpec::from_level(
          PerspectiveDistortionSpec::Level::kFull);
  MotionDistortionSpec motion;
  TimeSyncSpec time_sync;
  SystematicErrorSpec systematic;

  std::set<std::string>& kinds_for(io::AgentKind a, io::SensorKind s) {
    return enabled[static_cast<int>(a)][static_cast<int>(s)];
  }
  const std::set<std::string>& kinds_for(io::AgentKind a,
                                         io::SensorKind s) const {
    return enabled[static_cast<int>(a)][static_cast<int>(s)];
  }
  bool is_enabled(io::AgentKind a, io::SensorKind s,
                  const std::string& kind) const {
    return kinds_for(a, s).count(kind) > 0;
  }
};

inline RunConfig default_run_config() {
  using io::AgentKind;
  using io::SensorKind;
  RunConfig c;
  c.kinds_for(AgentKind::kVehicle, SensorKind::kLidar) = {
      "motion_distortion", "calibration_error", "time_desync"};
  c.kinds_for(AgentKind::kVehicle, SensorKind::kCamera) = {
      "calibration_error", "time_desync"};
  c.kinds_for(AgentKind::kInfrastructure, SensorKind::kLidar) = {
      "vibration", "systematic_error", "calibration_error", "time_desync"};
  c.kinds_for(AgentKind::kInfrastructure, SensorKind::kCamera) = {
      "vibration", "systematic_error", "perspective_distortion",
      "calibration_error", "time_desync"};
  return c;
}

inline RunConfig zero_noise_config() {
  return RunConfig{};
}

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ParseError("unknown config key '" + key + "' in " + context);
    }
  }
}

inline double num_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace detail

inline json run_config_to_json(const RunConfig& c) {
  using io::AgentKind;
  using io::SensorKind;
  json j;
  j["schema_version"] = 1;
  j["root_seed"] = c.root_seed;
  json noise;
  for (AgentKind a : {AgentKind::kVehicle, AgentKind::kInfrastructure}) {
    json per_agent;
    for (SensorKind s : {SensorKind::kLidar, SensorKind::kCamera}) {
      per_agent[io::to_string(s)] = c.kinds_for(a, s);
    }
    noise[io::to_string(a)] = std::move(per_agent);
  }
  j["noise"] = std::move(noise);
  j["calibration"] = {{"rot_range_deg", c.calibration.rot_range_deg},
                      {"trans_range_m", c.calibration.trans_range_m}};
  j["vibration"] = {
      {"amplitude_deg", c.vibration.amplitude_deg},
      {"frequency_hz", c.vibration.frequency_hz},
      {"sigma_x_m", c.vibration.sigma_x_m},
      {"sigma_y_m", c.vibration.sigma_y_m},
      {"sigma_z_m", c.vibration.sigma_z_m},
      {"image_amplitude_fraction", c.vibration.image_amplitude_fraction}};
  j["perspective"] = {{"alpha", c.perspective.alpha}};
  j["motion"] = {{"sector_count", c.motion.sector_count}};
  j["time_sync"] = {
      {"max_delay_s", c.time_sync.max_delay_s},
      {"direction",
       c.time_sync.direction == TimeSyncSpec::Direction::kCameraDelayed
           ? "camera_delayed"
           : "lidar_delayed"}};
  j["systematic"] = {
      {"rot_range_deg", c.systematic.rot_range_deg},
      {"trans_range_m", c.systematic.trans_range_m},
      {"image_shift_fraction", c.systematic.image_shift_fraction}};
  return j;
}

/// Strict parser: unknown keys anywhere are errors, not warnings.
inline RunConfig run_config_from_json(const json& j) {
  using io::AgentKind;
  using io::SensorKind;
  detail::check_keys(j,
                     {"schema_version", "root_seed", "noise", "calibration",
                      "vibration", "perspective", "motion", "time_sync",
                      "systematic"},
                     "config root");
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1) {
    throw ParseError("config: missing or unsupported schema_version");
  }

  RunConfig c = zero_noise_config();
  // A config that names no noise matrix corrupts nothing.
  c.calibration = CalibrationNoiseSpec{};
  if (j.contains("root_seed")) {
    c.root_seed = j.at("root_seed").get<std::uint64_t>();
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    detail::check_keys(n, {"vehicle", "infrastructure"}, "config.noise");
    for (AgentKind a : {AgentKind::kVehicle, AgentKind::kInfrastructure}) {
      if (!n.contains(io::to_string(a))) continue;
      const json& per_agent = n.at(io::to_string(a));
      detail::check_keys(per_agent, {"lidar", "camera"},
                         "config.noise." + io::to_string(a));
      for (SensorKind s : {SensorKind::kLidar, SensorKind::kCamera}) {
        if (!per_agent.contains(io::to_string(s))) continue;
        for (const json& kind : per_agent.at(io::to_string(s))) {
          std::string k = kind.get<std::string>();
          if (!known_noise_kinds().count(k)) {
            throw ParseError("config: unknown noise kind '" + k + "'");
          }
          c.kinds_for(a, s).insert(k);
        }
      }
    }
  }
  if (j.contains("calibration")) {
    const json& s = j.at("calibration");
    detail::check_keys(s, {"rot_range_deg", "trans_range_m"},
                       "config.calibration");
    c.calibration.rot_range_deg =
        detail::num_or(s, "rot_range_deg", c.calibration.rot_range_deg);
    c.calibration.trans_range_m =
        detail::num_or(s, "trans_range_m", c.calibration.trans_range_m);
    c.calibration.validate();
  }
  if (j.contains("vibration")) {
    const json& s = j.at("vibration");
    detail::check_keys(s,
                       {"amplitude_deg", "frequency_hz", "sigma_x_m",
                        "sigma_y_m", "sigma_z_m", "image_amplitude_fraction"},
                       "config.vibration");
    c.vibration.amplitude_deg =
        detail::num_or(s, "amplitude_deg", c.vibration.amplitude_deg);
    c.vibration.frequency_hz =
        detail::num_or(s, "frequency_hz", c.vibration.frequency_hz);
    c.vibration.sigma_x_m = detail::num_or(s, "sigma_x_m", c.vibration.sigma_x_m);
    c.vibration.sigma_y_m = detail::num_or(s, "sigma_y_m", c.vibration.sigma_y_m);
    c.vibration.sigma_z_m = detail::num_or(s, "sigma_z_m", c.vibration.sigma_z_m);
    c.vibration.image_amplitude_fraction = detail::num_or(
        s, "image_amplitude_fraction", c.vibration.image_amplitude_fraction);
    c.vibration.validate();
  }
  if (j.contains("perspective")) {
    const json& s = j.at("perspective");
    detail::check_keys(s, {"level", "alpha"}, "config.perspective");
    if (s.contains("level") && s.contains("alpha")) {
      throw ParseError("config.perspective: give either level or alpha");
    }
    if (s.contains("level")) {
      c.perspective =
          PerspectiveDistortionSpec::from_name(s.at("level").get<std::string>());
    } else if (s.contains("alpha")) {
      c.perspective.level = PerspectiveDistortionSpec::Level::kCustom;
      c.perspective.alpha = s.at("alpha").get<double>();
    }
    c.perspective.validate();
  }
  if (j.contains("motion")) {
    const json& s = j.at("motion");
    detail::check_keys(s, {"sector_count"}, "config.motion");
    if (s.contains("sector_count")) {
      c.motion.sector_count = s.at("sector_count").get<int>();
    }
    c.motion.validate();
  }
  if (j.contains("time_sync")) {
    const json& s = j.at("time_sync");
    detail::check_keys(s, {"max_delay_s", "direction"}, "config.time_sync");
    c.time_sync.max_delay_s =
        detail::num_or(s, "max_delay_s", c.time_sync.max_delay_s);
    if (s.contains("direction")) {
      std::string d = s.at("direction").get<std::string>();
      if (d == "camera_delayed") {
        c.time_sync.direction = TimeSyncSpec::Direction::kCameraDelayed;
      } else if (d == "lidar_delayed") {
        c.time_sync.direction = TimeSyncSpec::Direction::kLidarDelayed;
      } else {
        throw ParseError("config.time_sync: unknown direction '" + d + "'");
      }
    }
    c.time_sync.validate();
  }
  if (j.contains("systematic")) {
    const json& s = j.at("systematic");
    detail::check_keys(
        s, {"rot_range_deg", "trans_range_m", "image_shift_fraction"},
        "config.systematic");
    c.systematic.rot_range_deg =
        detail::num_or(s, "rot_range_deg", c.systematic.rot_range_deg);
    c.systematic.trans_range_m =
        detail::num_or(s, "trans_range_m", c.systematic.trans_range_m);
    c.systematic.image_shift_fraction = detail::num_or(
        s, "image_shift_fraction", c.systematic.image_shift_fraction);
    c.systematic.validate();
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config JSON error in " + path.string() + ": " + e.what(),
                     static_cast<std::size_t>(e.byte));
  }
  return run_config_from_json(j);
}

}  // namespace v2xnoise

#endif  // V2XNOISE_CONFIG_HPP
