#ifndef V2XNOISE_IO_CALIBRATION_HPP
#define V2XNOISE_IO_CALIBRATION_HPP

#include <Eigen/Core>
#include <Eigen/SVD>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "v2xnoise/errors.hpp"
#include "v2xnoise/geometry.hpp"

namespace v2xnoise::io {

/// Per-sensor calibration: an extrinsic transform, plus intrinsics for
/// cameras. The extrinsic_tag documents what the transform relates
/// ("lidar_to_camera" or "sensor_to_body").
struct CalibrationRecord {
  std::string sensor_id;
  std::string extrinsic_tag;
  RigidTransform extrinsic;
  std::optional<CameraModel> intrinsics;
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& value,
                                         std::size_t expect,
                                         const std::string& key) {
  std::istringstream ss(value);
  std::vector<double> out;
  double v;
  while (ss >> v) out.push_back(v);
  if (out.size() != expect) {
    throw ParseError("field '" + key + "' expects " + std::to_string(expect) +
                     " numbers, got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace detail

/// Key-value calibration file. Rotation is given either as
/// "rotation_matrix: r00 .. r22" (row-major) or "rotation_rpy_deg: r p y".
/// Non-orthonormal matrices beyond 1e-6 are rejected unless
/// `reorthonormalize` is set, in which case the nearest rotation (SVD
/// projection) is used.
inline CalibrationRecord read_calibration(const std::filesystem::path& path,
                                          bool reorthonormalize = false) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration: " + path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    std::size_t line_offset = offset;
    offset += line.size() + 1;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw ParseError("expected 'key: value' in " + path.string(),
                       line_offset);
    }
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t\r");
      std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
  }

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw ParseError("missing field '" + key + "' in " + path.string());
    }
    return it->second;
  };

  CalibrationRecord rec;
  rec.sensor_id = require("sensor_id");
  rec.extrinsic_tag = kv.count("extrinsic_tag") ? kv["extrinsic_tag"] : "";

  RigidTransform t;
  if (kv.count("rotation_matrix")) {
    auto v = detail::parse_numbers(kv["rotation_matrix"], 9, "rotation_matrix");
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) t.rotation(i, j) = v[3 * i + j];
    }
    if (!t.is_valid(1e-6)) {
      if (!reorthonormalize) {
        throw ParseError("field 'rotation_matrix' is not a rotation (beyond "
                         "1e-6) in " +
                         path.string());
      }
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(
          t.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
      if (r.determinant() < 0.0) {
        throw ParseError(
            "field 'rotation_matrix' is a reflection (det = -1) in " +
            path.string());
      }
      t.rotation = r;
    }
  } else if (kv.count("rotation_rpy_deg")) {
    auto v = detail::parse_numbers(kv["rotation_rpy_deg"], 3,
                                   "rotation_rpy_deg");
    t.rotation = rotation_from_rpy(
        RotationRpy(deg2rad(v[0]), deg2rad(v[1]), deg2rad(v[2])));
  } else {
    throw ParseError(
        "missing field 'rotation_matrix' or 'rotation_rpy_deg' in " +
        path.string());
  }
  auto tr = detail::parse_numbers(require("translation_m"), 3,
                                  "translation_m");
  t.translation = Eigen::Vector3d(tr[0], tr[1], tr[2]);
  t.frame_from = kv.count("frame_from") ? kv["frame_from"] : "";
  t.frame_to = kv.count("frame_to") ? kv["frame_to"] : "";
  rec.extrinsic = t;

  if (kv.count("fx")) {
    auto num = [&](const std::string& key) {
      return detail::parse_numbers(require(key), 1, key)[0];
    };
    rec.intrinsics = CameraModel(num("fx"), num("fy"), num("cx"), num("cy"),
                                 static_cast<int>(num("width")),
                                 static_cast<int>(num("height")));
  }
  return rec;
}

/// Deterministic writer: fixed key order, %.17g floats (shortest exact
/// round-trip for doubles).
inline void write_calibration(const CalibrationRecord& rec,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "sensor_id: " << rec.sensor_id << "\n";
  if (!rec.extrinsic_tag.empty()) {
    out << "extrinsic_tag: " << rec.extrinsic_tag << "\n";
  }
  if (!rec.extrinsic.frame_from.empty()) {
    out << "frame_from: " << rec.extrinsic.frame_from << "\n";
  }
  if (!rec.extrinsic.frame_to.empty()) {
    out << "frame_to: " << rec.extrinsic.frame_to << "\n";
  }
  out << "rotation_matrix:";
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out << " " << num(rec.extrinsic.rotation(i, j));
  }
  out << "\n";
  out << "translation_m: " << num(rec.extrinsic.translation.x()) << " "
      << num(rec.extrinsic.translation.y()) << " "
      << num(rec.extrinsic.translation.z()) << "\n";
  if (rec.intrinsics) {
    out << "fx: " << num(rec.intrinsics->fx) << "\n"
        << "fy: " << num(rec.intrinsics->fy) << "\n"
        << "cx: " << num(rec.intrinsics->cx) << "\n"
        << "cy: " << num(rec.intrinsics->cy) << "\n"
        << "width: " << rec.intrinsics->width << "\n"
        << "height: " << rec.intrinsics->height << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace v2xnoise::io

#endif  // V2XNOISE_IO_CALIBRATION_HPP
