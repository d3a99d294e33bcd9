#ifndef V2XNOISE_GEOMETRY_HPP
#define V2XNOISE_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "v2xnoise/errors.hpp"

namespace v2xnoise {

constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

// ============================================================================
// Domain types
// ============================================================================

/// Roll/pitch/yaw Euler angles, radians, intrinsic Z-Y-X (yaw * pitch * roll).
struct RotationRpy {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  RotationRpy() = default;
  RotationRpy(double roll_, double pitch_, double yaw_) {
    if (!std::isfinite(roll_) || !std::isfinite(pitch_) ||
        !std::isfinite(yaw_)) {
      throw std::invalid_argument("RotationRpy: non-finite angle");
    }
    roll = wrap_angle(roll_);
    pitch = wrap_angle(pitch_);
    yaw = wrap_angle(yaw_);
  }
};

/// Rigid SE(3) transform with frame bookkeeping. An empty frame name acts
/// as a wildcard and matches anything.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::string frame_from;
  std::string frame_to;

  static RigidTransform identity(const std::string& frame = "") {
    RigidTransform t;
    t.frame_from = frame;
    t.frame_to = frame;
    return t;
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  /// Max deviation from orthonormality / unit determinant.
  double rotation_defect() const {
    double ortho =
        (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff();
    double det = std::abs(rotation.determinant() - 1.0);
    return std::max(ortho, det);
  }

  bool is_valid(double tol = 1e-9) const {
    return translation.allFinite() && rotation.allFinite() &&
           rotation_defect() <= tol;
  }

  void validate(double tol = 1e-9) const {
    if (!is_valid(tol)) {
      throw std::invalid_argument("RigidTransform: rotation is not in SO(3)");
    }
  }
};

/// Pinhole camera intrinsics plus image extent.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  CameraModel() = default;
  CameraModel(double fx_, double fy_, double cx_, double cy_, int w, int h)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    if (!(fx > 0.0) || !(fy > 0.0) || w <= 0 || h <= 0 || cx < 0.0 ||
        cx >= w || cy < 0.0 || cy >= h) {
      throw std::invalid_argument("CameraModel: invalid intrinsics");
    }
  }

  Eigen::Matrix3d intrinsic_matrix() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

/// N points in a named frame. Azimuth/timestamp channels are optional and,
/// when present, have exactly one entry per point.
struct PointCloud {
  std::vector<Point> points;
  std::vector<double> azimuth;    // radians, empty or size N
  std::vector<double> timestamp;  // seconds, empty or size N
  std::string frame;

  std::size_t size() const { return points.size(); }
  bool has_azimuth() const { return !azimuth.empty(); }
  bool has_timestamp() const { return !timestamp.empty(); }

  void check_consistent() const {
    if ((!azimuth.empty() && azimuth.size() != points.size()) ||
        (!timestamp.empty() && timestamp.size() != points.size())) {
      throw std::invalid_argument("PointCloud: channel length mismatch");
    }
    for (const Point& p : points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        throw std::invalid_argument("PointCloud: non-finite coordinate");
      }
    }
  }
};

inline bool frames_match(const std::string& a, const std::string& b) {
  return a.empty() || b.empty() || a == b;
}

// ============================================================================
// Rotations
// ============================================================================

/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Eigen::Matrix3d rotation_from_rpy(const RotationRpy& angles) {
  if (!std::isfinite(angles.roll) || !std::isfinite(angles.pitch) ||
      !std::isfinite(angles.yaw)) {
    throw std::invalid_argument("rotation_from_rpy: non-finite angle");
  }
  return (Eigen::AngleAxisd(angles.yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(angles.pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(angles.roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

/// Inverse of rotation_from_rpy away from gimbal lock (|pitch| near pi/2).
inline RotationRpy rpy_from_rotation(const Eigen::Matrix3d& r) {
  // For R = Rz*Ry*Rx: R(2,0) = -sin(pitch).
  double sp = -r(2, 0);
  sp = std::clamp(sp, -1.0, 1.0);
  double pitch = std::asin(sp);
  if (std::abs(pitch) >= kPi / 2.0 - 1e-6) {
    throw DegenerateOrientationError(
        "rpy_from_rotation: pitch within 1e-6 of +-pi/2 (gimbal lock)");
  }
  double roll = std::atan2(r(2, 1), r(2, 2));
  double yaw = std::atan2(r(1, 0), r(0, 0));
  return RotationRpy(roll, pitch, yaw);
}

// ============================================================================
// SE(3) operations
// ============================================================================

/// a after b: (a o b)(p) = a(b(p)). Requires a.frame_from == b.frame_to.
inline RigidTransform compose(const RigidTransform& a,
                              const RigidTransform& b) {
  if (!frames_match(a.frame_from, b.frame_to)) {
    throw FrameError("compose: frame mismatch '" + a.frame_from + "' vs '" +
                     b.frame_to + "'");
  }
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.frame_from = b.frame_from.empty() ? a.frame_from : b.frame_from;
  out.frame_to = a.frame_to.empty() ? b.frame_to : a.frame_to;
  return out;
}

inline RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  out.frame_from = t.frame_to;
  out.frame_to = t.frame_from;
  return out;
}

/// Applies T to every point; intensity and optional channels pass through.
inline PointCloud transform_points(const RigidTransform& t,
                                   const PointCloud& cloud) {
  if (!frames_match(cloud.frame, t.frame_from)) {
    throw FrameError("transform_points: cloud frame '" + cloud.frame +
                     "' does not match transform source frame '" +
                     t.frame_from + "'");
  }
  PointCloud out = cloud;
  out.frame = t.frame_to.empty() ? cloud.frame : t.frame_to;
  for (Point& p : out.points) {
    Eigen::Vector3d q = t.apply(Eigen::Vector3d(p.x, p.y, p.z));
    p.x = q.x();
    p.y = q.y();
    p.z = q.z();
  }
  return out;
}

struct ProjectedPoint {
  double u = 0.0;      // pixels, column
  double v = 0.0;      // pixels, row
  double depth = 0.0;  // meters, camera-frame z
  std::size_t point_index = 0;
};

struct ProjectionResult {
  std::vector<ProjectedPoint> points;  // sorted by point_index
  std::size_t dropped = 0;             // behind camera or outside the image
};

/// Points with camera-frame depth <= kMinProjectionDepth are culled before
/// the perspective divide.
constexpr double kMinProjectionDepth = 1e-3;

/// Pinhole projection of a cloud through the lidar->camera transform.
/// Retains only points landing inside [0,W) x [0,H) in front of the camera.
inline ProjectionResult project_points(const CameraModel& cam,
                                       const RigidTransform& t_lidar2img,
                                       const PointCloud& cloud) {
  if (!frames_match(cloud.frame, t_lidar2img.frame_from)) {
    throw FrameError("project_points: cloud frame '" + cloud.frame +
                     "' does not match transform source frame '" +
                     t_lidar2img.frame_from + "'");
  }
  ProjectionResult result;
  result.points.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud.points[i];
    Eigen::Vector3d c = t_lidar2img.apply(Eigen::Vector3d(p.x, p.y, p.z));
    if (c.z() <= kMinProjectionDepth) {
      ++result.dropped;
      continue;
    }
    double u = cam.fx * c.x() / c.z() + cam.cx;
    double v = cam.fy * c.y() / c.z() + cam.cy;
    if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height) {
      ++result.dropped;
      continue;
    }
    result.points.push_back({u, v, c.z(), i});
  }
  return result;
}

// --- SE(3) log/exp --------------------------------------------------------

inline Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

/// Rotation-vector logarithm; angle in [0, pi).
inline Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  Eigen::AngleAxisd aa(r);
  double angle = aa.angle();
  if (angle >= kPi - 1e-9) {
    throw DegenerateOrientationError(
        "so3_log: rotation angle at or near pi is not uniquely invertible");
  }
  return aa.angle() * aa.axis();
}

inline Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  double angle = w.norm();
  if (angle < 1e-12) {
    return Eigen::Matrix3d::Identity() + skew(w);
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

/// Left Jacobian of SO(3): V(w) with exp([w, v]) translation = V(w) v.
inline Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& w) {
  double theta = w.norm();
  Eigen::Matrix3d k = skew(w);
  if (theta < 1e-6) {
    // Second-order Taylor expansion, accurate to ~1e-24 here.
    return Eigen::Matrix3d::Identity() + 0.5 * k + (1.0 / 6.0) * k * k;
  }
  double t2 = theta * theta;
  return Eigen::Matrix3d::Identity() + ((1.0 - std::cos(theta)) / t2) * k +
         ((theta - std::sin(theta)) / (t2 * theta)) * k * k;
}

inline Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& w) {
  double theta = w.norm();
  Eigen::Matrix3d k = skew(w);
  if (theta < 1e-6) {
    return Eigen::Matrix3d::Identity() - 0.5 * k + (1.0 / 12.0) * k * k;
  }
  double half = 0.5 * theta;
  double cot_coeff =
      (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Eigen::Matrix3d::Identity() - 0.5 * k + cot_coeff * k * k;
}

/// Screw interpolation: the s-th power of T on SE(3) via log/exp.
/// fractional_transform(T, 1/N) composed N times reproduces T.
inline RigidTransform fractional_transform(const RigidTransform& t, double s) {
  if (!std::isfinite(s)) {
    throw std::invalid_argument("fractional_transform: non-finite fraction");
  }
  Eigen::Vector3d w = so3_log(t.rotation);  // throws near pi
  Eigen::Vector3d v = so3_left_jacobian_inverse(w) * t.translation;
  RigidTransform out;
  out.rotation = so3_exp(s * w);
  out.translation = so3_left_jacobian(s * w) * (s * v);
  out.frame_from = t.frame_from;
  out.frame_to = t.frame_to;
  return out;
}

}  // namespace v2xnoise

#endif  // V2XNOISE_GEOMETRY_HPP
