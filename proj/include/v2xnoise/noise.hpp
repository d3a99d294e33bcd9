#ifndef V2XNOISE_NOISE_HPP
#define V2XNOISE_NOISE_HPP

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "v2xnoise/geometry.hpp"
#include "v2xnoise/image.hpp"
#include "v2xnoise/random.hpp"

namespace v2xnoise {

// ============================================================================
// Specs. Angle ranges are stored in degrees (the units the ranges are quoted
// in) and converted to radians exactly once where the perturbation is built.
// ============================================================================

struct CalibrationNoiseSpec {
  double rot_range_deg = 0.5;  // per-axis uniform half-width
  double trans_range_m = 0.5;

  void validate() const {
    if (rot_range_deg < 0.0 || trans_range_m < 0.0) {
      throw std::invalid_argument("CalibrationNoiseSpec: negative range");
    }
  }
};

struct VibrationSpec {
  double amplitude_deg = 0.5;  // rotational amplitude A
  double frequency_hz = 2.0;
  // Per-axis rotational phase shifts, radians in [0, 2*pi).
  double phase_roll = 0.0;
  double phase_pitch = 0.0;
  double phase_yaw = 0.0;
  double sigma_x_m = 0.02;  // translation jitter
  double sigma_y_m = 0.02;
  double sigma_z_m = 0.01;
  double image_amplitude_fraction = 0.015;  // of W (horizontal) / H (vertical)
  double image_phase_u = 0.0;
  double image_phase_v = 0.0;

  void validate() const {
    if (amplitude_deg < 0.0 || frequency_hz <= 0.0 || sigma_x_m < 0.0 ||
        sigma_y_m < 0.0 || sigma_z_m < 0.0 || image_amplitude_fraction < 0.0) {
      throw std::invalid_argument("VibrationSpec: invalid parameter");
    }
    for (double p : {phase_roll, phase_pitch, phase_yaw, image_phase_u,
                     image_phase_v}) {
      if (p < 0.0 || p >= 2.0 * kPi) {
        throw std::invalid_argument("VibrationSpec: phase outside [0, 2pi)");
      }
    }
  }

  /// Draws the five phase shifts from a stream. Done once per
  /// (scenario, sensor) so a frame sequence oscillates coherently.
  static VibrationSpec with_sampled_phases(VibrationSpec base,
                                           RandomStream& rng) {
    base.phase_roll = rng.uniform(0.0, 2.0 * kPi);
    base.phase_pitch = rng.uniform(0.0, 2.0 * kPi);
    base.phase_yaw = rng.uniform(0.0, 2.0 * kPi);
    base.image_phase_u = rng.uniform(0.0, 2.0 * kPi);
    base.image_phase_v = rng.uniform(0.0, 2.0 * kPi);
    return base;
  }
};

struct PerspectiveDistortionSpec {
  enum class Level { kMinimal, kLow, kModerate, kFull, kCustom };

  double alpha = 0.028;
  Level level = Level::kFull;

  static PerspectiveDistortionSpec from_level(Level level) {
    PerspectiveDistortionSpec s;
    s.level = level;
    switch (level) {
      case Level::kMinimal: s.alpha = 0.007; break;
      case Level::kLow: s.alpha = 0.014; break;
      case Level::kModerate: s.alpha = 0.021; break;
      case Level::kFull: s.alpha = 0.028; break;
      case Level::kCustom:
        throw std::invalid_argument("custom level needs an explicit alpha");
    }
    return s;
  }

  static PerspectiveDistortionSpec from_name(const std::string& name) {
    if (name == "minimal") return from_level(Level::kMinimal);
    if (name == "low") return from_level(Level::kLow);
    if (name == "moderate") return from_level(Level::kModerate);
    if (name == "full") return from_level(Level::kFull);
    throw std::invalid_argument("unknown distortion level '" + name + "'");
  }

  void validate() const {
    if (alpha < 0.0) {
      throw std::invalid_argument("PerspectiveDistortionSpec: negative alpha");
    }
  }
};

struct MotionDistortionSpec {
  int sector_count = 100;

  void validate() const {
    if (sector_count < 1) {
      throw std::invalid_argument("MotionDistortionSpec: sector_count < 1");
    }
  }
};

struct TimeSyncSpec {
  enum class Direction { kCameraDelayed, kLidarDelayed };

  double max_delay_s = 0.1;
  Direction direction = Direction::kCameraDelayed;

  void validate() const {
    if (max_delay_s < 0.0) {
      throw std::invalid_argument("TimeSyncSpec: negative max_delay");
    }
  }
};

struct SystematicErrorSpec {
  double rot_range_deg = 0.1;
  double trans_range_m = 0.1;
  double image_shift_fraction = 0.015;

  void validate() const {
    if (rot_range_deg < 0.0 || trans_range_m < 0.0 ||
        image_shift_fraction < 0.0) {
      throw std::invalid_argument("SystematicErrorSpec: negative range");
    }
  }
};

// ============================================================================
// Generators
// ============================================================================

/// Sampled calibration perturbation, kept for the corruption ledger.
struct CalibrationSample {
  double d_roll_deg = 0.0;
  double d_pitch_deg = 0.0;
  double d_yaw_deg = 0.0;
  double d_tx_m = 0.0;
  double d_ty_m = 0.0;
  double d_tz_m = 0.0;
};

struct PerturbedTransform {
  RigidTransform transform;
  CalibrationSample sample;
};

namespace detail {

/// Perturbs T by per-axis angle offsets (radians) and a translation offset.
/// The offsets form a small delta rotation that is composed onto the base
/// rotation; composing (rather than decomposing the base into angles and
/// re-assembling) keeps lidar-camera extrinsics, which sit at pitch -90 deg,
/// away from the RPY singularity. Zero offsets leave the input bit-identical.
inline RigidTransform apply_pose_offsets(const RigidTransform& t,
                                         const Eigen::Vector3d& d_rpy,
                                         const Eigen::Vector3d& d_t) {
  RigidTransform out = t;
  if (d_rpy != Eigen::Vector3d::Zero()) {
    out.rotation =
        rotation_from_rpy(RotationRpy(d_rpy.x(), d_rpy.y(), d_rpy.z())) *
        t.rotation;
  }
  out.translation = t.translation + d_t;
  return out;
}

}  // namespace detail

/// Uniform per-axis perturbation of an extrinsic transform.
/// Draw order: roll, pitch, yaw, tx, ty, tz.
inline PerturbedTransform perturb_calibration(const RigidTransform& t,
                                              const CalibrationNoiseSpec& spec,
                                              RandomStream& rng) {
  spec.validate();
  CalibrationSample s;
  s.d_roll_deg = rng.uniform(-spec.rot_range_deg, spec.rot_range_deg);
  s.d_pitch_deg = rng.uniform(-spec.rot_range_deg, spec.rot_range_deg);
  s.d_yaw_deg = rng.uniform(-spec.rot_range_deg, spec.rot_range_deg);
  s.d_tx_m = rng.uniform(-spec.trans_range_m, spec.trans_range_m);
  s.d_ty_m = rng.uniform(-spec.trans_range_m, spec.trans_range_m);
  s.d_tz_m = rng.uniform(-spec.trans_range_m, spec.trans_range_m);
  PerturbedTransform out;
  out.sample = s;
  out.transform = detail::apply_pose_offsets(
      t,
      Eigen::Vector3d(deg2rad(s.d_roll_deg), deg2rad(s.d_pitch_deg),
                      deg2rad(s.d_yaw_deg)),
      Eigen::Vector3d(s.d_tx_m, s.d_ty_m, s.d_tz_m));
  return out;
}

/// Deterministic sinusoidal angle offsets (roll, pitch, yaw), radians.
inline Eigen::Vector3d vibration_angle_offsets(double t_s,
                                               const VibrationSpec& spec) {
  double a = deg2rad(spec.amplitude_deg);
  double w = 2.0 * kPi * spec.frequency_hz * t_s;
  return Eigen::Vector3d(a * std::sin(w + spec.phase_roll),
                         a * std::sin(w + spec.phase_pitch),
                         a * std::sin(w + spec.phase_yaw));
}

struct VibrationSample {
  Eigen::Vector3d angle_offsets_rad = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation_offsets_m = Eigen::Vector3d::Zero();
};

struct VibratedTransform {
  RigidTransform transform;
  VibrationSample sample;
};

/// Sinusoidal rotation plus Gaussian translation jitter at time t.
/// The rotational part is a pure function of (t, phases); only the three
/// translation draws consume the stream (order x, y, z).
inline VibratedTransform vibration_transform(const RigidTransform& t,
                                             double t_s,
                                             const VibrationSpec& spec,
                                             RandomStream& rng) {
  spec.validate();
  if (t_s < 0.0) {
    throw std::invalid_argument("vibration_transform: negative time");
  }
  VibrationSample s;
  s.angle_offsets_rad = vibration_angle_offsets(t_s, spec);
  s.translation_offsets_m.x() = rng.gaussian(0.0, spec.sigma_x_m);
  s.translation_offsets_m.y() = rng.gaussian(0.0, spec.sigma_y_m);
  s.translation_offsets_m.z() = rng.gaussian(0.0, spec.sigma_z_m);
  VibratedTransform out;
  out.sample = s;
  out.transform = detail::apply_pose_offsets(t, s.angle_offsets_rad,
                                             s.translation_offsets_m);
  return out;
}

/// Pixel shift of the camera image under vibration at time t.
inline std::pair<double, double> vibration_image_shift(
    double t_s, const CameraModel& cam, const VibrationSpec& spec) {
  spec.validate();
  if (t_s < 0.0) {
    throw std::invalid_argument("vibration_image_shift: negative time");
  }
  double w = 2.0 * kPi * spec.frequency_hz * t_s;
  double du = spec.image_amplitude_fraction * cam.width *
              std::sin(w + spec.image_phase_u);
  double dv = spec.image_amplitude_fraction * cam.height *
              std::sin(w + spec.image_phase_v);
  return {du, dv};
}

/// Closed-form perspective homography: the top image corners move
/// horizontally outward by alpha*W while the bottom edge stays fixed.
inline Eigen::Matrix3d perspective_homography(int width, int height,
                                              double alpha) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument(
        "perspective_homography: non-positive dimensions");
  }
  if (alpha < 0.0) {
    throw std::invalid_argument("perspective_homography: negative alpha");
  }
  double w = width;
  double h = height;
  Eigen::Matrix3d m;
  m << 1.0 + 2.0 * alpha, alpha * w / h, -alpha * w,
       0.0, 1.0 + 2.0 * alpha, 0.0,
       0.0, 2.0 * alpha / h, 1.0;
  return m;
}

/// Sector index for an azimuth in [0, 2*pi): boundaries sit at 2*pi*n/N and
/// a point exactly on a boundary goes to the lower-index sector (azimuth 0,
/// the start of the sweep, stays in sector 0).
inline int azimuth_sector(double azimuth, int sector_count) {
  double a = azimuth - 2.0 * kPi * std::floor(azimuth / (2.0 * kPi));
  if (a >= 2.0 * kPi) a = 0.0;  // guards the fmod edge at exactly 2*pi
  double step = 2.0 * kPi / sector_count;
  int n = static_cast<int>(a / step);
  if (n > 0 && a == n * step) --n;
  return std::min(n, sector_count - 1);
}

/// Intra-sweep motion distortion: sector n (of N) receives the fractional
/// ego motion (n+1)/N, so the latest-scanned points are displaced the most.
inline PointCloud motion_distort(const PointCloud& cloud,
                                 const RigidTransform& t_motion,
                                 const MotionDistortionSpec& spec) {
  spec.validate();
  cloud.check_consistent();
  int n_sectors = spec.sector_count;

  std::vector<RigidTransform> sector_transform(n_sectors);
  for (int n = 0; n < n_sectors; ++n) {
    sector_transform[n] = fractional_transform(
        t_motion, static_cast<double>(n + 1) / n_sectors);
  }

  PointCloud out = cloud;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud.points[i];
    double az = cloud.has_azimuth() ? cloud.azimuth[i] : std::atan2(p.y, p.x);
    const RigidTransform& t = sector_transform[azimuth_sector(az, n_sectors)];
    Eigen::Vector3d q = t.apply(Eigen::Vector3d(p.x, p.y, p.z));
    out.points[i].x = q.x();
    out.points[i].y = q.y();
    out.points[i].z = q.z();
  }
  return out;
}

struct DesyncPairing {
  std::vector<std::size_t> camera_index_per_lidar;
  double delay_s = 0.0;
};

/// Re-pairs LiDAR frames with camera frames under a single sampled trigger
/// delay per sensor pair. With kCameraDelayed the camera fires late, so the
/// LiDAR frame at time tau matches the camera frame nearest tau + delay.
inline DesyncPairing desynchronize(const std::vector<double>& lidar_ts,
                                   const std::vector<double>& camera_ts,
                                   const TimeSyncSpec& spec,
                                   RandomStream& rng) {
  spec.validate();
  if (lidar_ts.empty() || camera_ts.empty()) {
    throw std::invalid_argument("desynchronize: empty timestamp list");
  }
  for (const auto* ts : {&lidar_ts, &camera_ts}) {
    for (std::size_t i = 1; i < ts->size(); ++i) {
      if ((*ts)[i] <= (*ts)[i - 1]) {
        throw std::invalid_argument(
            "desynchronize: timestamps not strictly increasing");
      }
    }
  }

  DesyncPairing out;
  out.delay_s = rng.uniform(0.0, spec.max_delay_s);
  double signed_delay = spec.direction == TimeSyncSpec::Direction::kCameraDelayed
                            ? out.delay_s
                            : -out.delay_s;
  out.camera_index_per_lidar.reserve(lidar_ts.size());
  for (double tau : lidar_ts) {
    double target = tau + signed_delay;
    auto it = std::lower_bound(camera_ts.begin(), camera_ts.end(), target);
    std::size_t best = it - camera_ts.begin();
    if (best == camera_ts.size()) {
      best = camera_ts.size() - 1;
    } else if (best > 0 &&
               target - camera_ts[best - 1] <= camera_ts[best] - target) {
      --best;  // earlier frame wins ties
    }
    out.camera_index_per_lidar.push_back(best);
  }
  return out;
}

struct SystematicOffset {
  RigidTransform pose_offset;  // applied to LiDAR data every frame
  double image_du = 0.0;       // fixed camera pixel shift
  double image_dv = 0.0;
  CalibrationSample sample;    // rotation/translation deltas, for the ledger
};

/// Fixed per-sensor offset, sampled exactly once per (scenario, sensor) and
/// reused for every frame. Draw order: roll, pitch, yaw, tx, ty, tz, du, dv.
inline SystematicOffset systematic_offset(const SystematicErrorSpec& spec,
                                          const CameraModel& cam,
                                          RandomStream& rng) {
  spec.validate();
  SystematicOffset out;
  CalibrationSample& s = out.sample;
  s.d_roll_deg = rng.uniform(-spec.rot_range_deg, spec.rot_range_deg);
  s.d_pitch_deg = rng.uniform(-spec.rot_range_deg, spec.rot_range_deg);
  s.d_yaw_deg = rng.uniform(-spec.rot_range_deg, spec.rot_range_deg);
  s.d_tx_m = rng.uniform(-spec.trans_range_m, spec.trans_range_m);
  s.d_ty_m = rng.uniform(-spec.trans_range_m, spec.trans_range_m);
  s.d_tz_m = rng.uniform(-spec.trans_range_m, spec.trans_range_m);
  double du_max = spec.image_shift_fraction * cam.width;
  double dv_max = spec.image_shift_fraction * cam.height;
  out.image_du = rng.uniform(-du_max, du_max);
  out.image_dv = rng.uniform(-dv_max, dv_max);
  out.pose_offset = detail::apply_pose_offsets(
      RigidTransform{},
      Eigen::Vector3d(deg2rad(s.d_roll_deg), deg2rad(s.d_pitch_deg),
                      deg2rad(s.d_yaw_deg)),
      Eigen::Vector3d(s.d_tx_m, s.d_ty_m, s.d_tz_m));
  return out;
}

/// Variant for sensors with no image plane (LiDAR): the image-shift draws
/// are still consumed, with zero range, so the draw order stays uniform.
inline SystematicOffset systematic_offset(const SystematicErrorSpec& spec,
                                          RandomStream& rng) {
  SystematicErrorSpec no_image = spec;
  no_image.image_shift_fraction = 0.0;
  CameraModel unit(1.0, 1.0, 0.0, 0.0, 1, 1);
  return systematic_offset(no_image, unit, rng);
}

}  // namespace v2xnoise

#endif  // V2XNOISE_NOISE_HPP
