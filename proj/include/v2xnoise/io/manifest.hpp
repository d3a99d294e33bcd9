#ifndef V2XNOISE_IO_MANIFEST_HPP
#define V2XNOISE_IO_MANIFEST_HPP

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "v2xnoise/errors.hpp"
#include "v2xnoise/geometry.hpp"

namespace v2xnoise::io {

using nlohmann::json;

enum class SensorKind { kLidar, kCamera };
enum class AgentKind { kVehicle, kInfrastructure };

inline std::string to_string(SensorKind k) {
  return k == SensorKind::kLidar ? "lidar" : "camera";
}
inline std::string to_string(AgentKind k) {
  return k == AgentKind::kVehicle ? "vehicle" : "infrastructure";
}

struct FrameRecord {
  std::string frame_id;
  double timestamp_s = 0.0;
  std::string file;  // relative to the manifest directory
  // Agent pose in the world frame at this timestamp; needed for motion
  // distortion, optional otherwise.
  std::optional<RigidTransform> pose;
  // Per-frame noisy calibration file; set by the corruption pipeline when
  // calibration error is enabled, absent in clean manifests.
  std::string calibration;
};

struct SensorRecord {
  std::string sensor_id;
  SensorKind kind = SensorKind::kLidar;
  std::string calibration;  // relative path to the calibration file
  std::vector<FrameRecord> frames;

  std::vector<double> timestamps() const {
    std::vector<double> ts;
    ts.reserve(frames.size());
    for (const FrameRecord& f : frames) ts.push_back(f.timestamp_s);
    return ts;
  }
};

/// LiDAR-to-camera frame pairing produced by time desynchronization;
/// present only in corrupted output manifests.
struct FramePairing {
  std::string lidar_sensor_id;
  std::string camera_sensor_id;
  std::vector<std::size_t> camera_index_per_lidar;
};

struct AgentRecord {
  std::string agent_id;
  AgentKind kind = AgentKind::kVehicle;
  std::vector<SensorRecord> sensors;
  std::vector<FramePairing> frame_pairings;
};

struct ScenarioManifest {
  std::string scenario_id;
  std::vector<AgentRecord> agents;
  std::filesystem::path root;  // directory holding the manifest
};

namespace detail {

inline RigidTransform pose_from_json(const json& j) {
  RigidTransform t;
  auto rpy = j.at("rpy_deg");
  auto tr = j.at("translation_m");
  if (rpy.size() != 3 || tr.size() != 3) {
    throw ParseError("manifest pose: rpy_deg/translation_m need 3 entries");
  }
  t.rotation = rotation_from_rpy(RotationRpy(deg2rad(rpy[0].get<double>()),
                                             deg2rad(rpy[1].get<double>()),
                                             deg2rad(rpy[2].get<double>())));
  t.translation = Eigen::Vector3d(tr[0].get<double>(), tr[1].get<double>(),
                                  tr[2].get<double>());
  return t;
}

inline json pose_to_json(const RigidTransform& t) {
  RotationRpy rpy = rpy_from_rotation(t.rotation);
  return json{{"rpy_deg", {rad2deg(rpy.roll), rad2deg(rpy.pitch),
                           rad2deg(rpy.yaw)}},
              {"translation_m", {t.translation.x(), t.translation.y(),
                                 t.translation.z()}}};
}

}  // namespace detail

inline ScenarioManifest load_manifest(const std::filesystem::path& path,
                                      bool check_files = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("manifest JSON error in " + path.string() + ": " +
                         e.what(),
                     static_cast<std::size_t>(e.byte));
  }

  ScenarioManifest m;
  m.root = path.parent_path();
  try {
    if (j.at("schema_version").get<int>() != 1) {
      throw ParseError("unsupported manifest schema_version in " +
                       path.string());
    }
    m.scenario_id = j.at("scenario_id").get<std::string>();
    for (const json& ja : j.at("agents")) {
      AgentRecord agent;
      agent.agent_id = ja.at("agent_id").get<std::string>();
      std::string kind = ja.at("kind").get<std::string>();
      if (kind == "vehicle") {
        agent.kind = AgentKind::kVehicle;
      } else if (kind == "infrastructure") {
        agent.kind = AgentKind::kInfrastructure;
      } else {
        throw ParseError("unknown agent kind '" + kind + "' in " +
                         path.string());
      }
      for (const json& js : ja.at("sensors")) {
        SensorRecord sensor;
        sensor.sensor_id = js.at("sensor_id").get<std::string>();
        std::string skind = js.at("kind").get<std::string>();
        if (skind == "lidar") {
          sensor.kind = SensorKind::kLidar;
        } else if (skind == "camera") {
          sensor.kind = SensorKind::kCamera;
        } else {
          throw ParseError("unknown sensor kind '" + skind + "' in " +
                           path.string());
        }
        sensor.calibration = js.at("calibration").get<std::string>();
        for (const json& jf : js.at("frames")) {
          FrameRecord frame;
          frame.frame_id = jf.at("frame_id").get<std::string>();
          frame.timestamp_s = jf.at("timestamp_s").get<double>();
          frame.file = jf.at("file").get<std::string>();
          if (jf.contains("pose")) {
            frame.pose = detail::pose_from_json(jf.at("pose"));
          }
          if (jf.contains("calibration")) {
            frame.calibration = jf.at("calibration").get<std::string>();
          }
          sensor.frames.push_back(std::move(frame));
        }
        agent.sensors.push_back(std::move(sensor));
      }
      if (ja.contains("frame_pairings")) {
        for (const json& jp : ja.at("frame_pairings")) {
          FramePairing p;
          p.lidar_sensor_id = jp.at("lidar").get<std::string>();
          p.camera_sensor_id = jp.at("camera").get<std::string>();
          p.camera_index_per_lidar =
              jp.at("camera_index_per_lidar").get<std::vector<std::size_t>>();
          agent.frame_pairings.push_back(std::move(p));
        }
      }
      m.agents.push_back(std::move(agent));
    }
  } catch (const json::exception& e) {
    throw ParseError("manifest schema error in " + path.string() + ": " +
                     e.what());
  }

  for (const AgentRecord& agent : m.agents) {
    for (const SensorRecord& sensor : agent.sensors) {
      double prev = -std::numeric_limits<double>::infinity();
      for (const FrameRecord& frame : sensor.frames) {
        if (frame.timestamp_s <= prev) {
          throw ParseError("timestamps of sensor '" + sensor.sensor_id +
                           "' are not strictly increasing in " +
                           path.string());
        }
        prev = frame.timestamp_s;
        if (check_files &&
            !std::filesystem::exists(m.root / frame.file)) {
          throw ParseError("referenced file missing: " +
                           (m.root / frame.file).string());
        }
      }
      if (check_files && !sensor.calibration.empty() &&
          !std::filesystem::exists(m.root / sensor.calibration)) {
        throw ParseError("calibration file missing: " +
                         (m.root / sensor.calibration).string());
      }
    }
  }
  return m;
}

inline void save_manifest(const ScenarioManifest& m,
                          const std::filesystem::path& path) {
  json j;
  j["schema_version"] = 1;
  j["scenario_id"] = m.scenario_id;
  j["agents"] = json::array();
  for (const AgentRecord& agent : m.agents) {
    json ja;
    ja["agent_id"] = agent.agent_id;
    ja["kind"] = to_string(agent.kind);
    ja["sensors"] = json::array();
    for (const SensorRecord& sensor : agent.sensors) {
      json js;
      js["sensor_id"] = sensor.sensor_id;
      js["kind"] = to_string(sensor.kind);
      js["calibration"] = sensor.calibration;
      js["frames"] = json::array();
      for (const FrameRecord& frame : sensor.frames) {
        json jf;
        jf["frame_id"] = frame.frame_id;
        jf["timestamp_s"] = frame.timestamp_s;
        jf["file"] = frame.file;
        if (frame.pose) jf["pose"] = detail::pose_to_json(*frame.pose);
        if (!frame.calibration.empty()) jf["calibration"] = frame.calibration;
        js["frames"].push_back(std::move(jf));
      }
      ja["sensors"].push_back(std::move(js));
    }
    if (!agent.frame_pairings.empty()) {
      ja["frame_pairings"] = json::array();
      for (const FramePairing& p : agent.frame_pairings) {
        ja["frame_pairings"].push_back(
            json{{"lidar", p.lidar_sensor_id},
                 {"camera", p.camera_sensor_id},
                 {"camera_index_per_lidar", p.camera_index_per_lidar}});
      }
    }
    j["agents"].push_back(std::move(ja));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace v2xnoise::io

#endif  // V2XNOISE_IO_MANIFEST_HPP
