#ifndef V2XNOISE_PIPELINE_HPP
#define V2XNOISE_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "v2xnoise/cfas.hpp"
#include "v2xnoise/config.hpp"
#include "v2xnoise/io/calibration.hpp"
#include "v2xnoise/io/digest.hpp"
#include "v2xnoise/io/ledger.hpp"
#include "v2xnoise/io/manifest.hpp"
#include "v2xnoise/io/pcd.hpp"
#include "v2xnoise/io/png.hpp"
#include "v2xnoise/noise.hpp"
#include "v2xnoise/random.hpp"

namespace v2xnoise {

namespace fs = std::filesystem;

// ============================================================================
// Seed derivation. Every sampled value is keyed by
// (root_seed, scenario, agent, sensor, noise_kind[, frame]), never by
// execution order, so frame-parallel runs are bit-reproducible.
// ============================================================================

inline RandomStream sensor_stream(std::uint64_t seed,
                                  const std::string& scenario,
                                  const std::string& agent,
                                  const std::string& sensor) {
  return RandomStream(seed).derive(scenario).derive(agent).derive(sensor);
}

inline RandomStream calibration_stream(std::uint64_t seed,
                                       const std::string& scenario,
                                       const std::string& agent,
                                       const std::string& sensor,
                                       const std::string& frame) {
  return sensor_stream(seed, scenario, agent, sensor)
      .derive("calibration_error")
      .derive(frame);
}

inline RandomStream vibration_phase_stream(std::uint64_t seed,
                                           const std::string& scenario,
                                           const std::string& agent,
                                           const std::string& sensor) {
  return sensor_stream(seed, scenario, agent, sensor)
      .derive("vibration")
      .derive("phases");
}

inline RandomStream vibration_frame_stream(std::uint64_t seed,
                                           const std::string& scenario,
                                           const std::string& agent,
                                           const std::string& sensor,
                                           const std::string& frame) {
  return sensor_stream(seed, scenario, agent, sensor)
      .derive("vibration")
      .derive(frame);
}

inline RandomStream systematic_stream(std::uint64_t seed,
                                      const std::string& scenario,
                                      const std::string& agent,
                                      const std::string& sensor) {
  return sensor_stream(seed, scenario, agent, sensor)
      .derive("systematic_error");
}

inline RandomStream desync_stream(std::uint64_t seed,
                                  const std::string& scenario,
                                  const std::string& agent,
                                  const std::string& pair_key) {
  return RandomStream(seed)
      .derive(scenario)
      .derive(agent)
      .derive("time_desync")
      .derive(pair_key);
}

// ============================================================================
// Corruption run
// ============================================================================

struct CorruptionOutcome {
  io::CorruptionLedger ledger;
  std::vector<std::string> frame_errors;  // one line per failed frame
  fs::path data_root;                     // mirrored dataset
  fs::path ledger_path;

  bool success() const { return frame_errors.empty(); }
};

namespace detail {

struct SensorState {
  const io::AgentRecord* agent = nullptr;
  const io::SensorRecord* sensor = nullptr;
  io::CalibrationRecord calibration;
  std::set<std::string> kinds;  // enabled noise kinds for this sensor
  VibrationSpec vibration;      // with phases bound, when vibration enabled
  SystematicOffset systematic;  // when systematic_error enabled
  double t0 = 0.0;              // first frame timestamp
  bool payload_touched = false;

  bool has(const std::string& kind) const { return kinds.count(kind) > 0; }
};

inline json calibration_sample_to_json(const CalibrationSample& s) {
  return json{{"d_roll_deg", s.d_roll_deg}, {"d_pitch_deg", s.d_pitch_deg},
              {"d_yaw_deg", s.d_yaw_deg},   {"d_tx_m", s.d_tx_m},
              {"d_ty_m", s.d_ty_m},         {"d_tz_m", s.d_tz_m}};
}

inline json transform_to_json(const RigidTransform& t) {
  RotationRpy rpy = rpy_from_rotation(t.rotation);
  return json{{"rpy_deg", {rad2deg(rpy.roll), rad2deg(rpy.pitch),
                           rad2deg(rpy.yaw)}},
              {"translation_m",
               {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

/// Ego motion between consecutive frames, expressed in the sensor frame at
/// time t: inv(S) * inv(P_t) * P_{t+1} * S, with S the sensor->body
/// extrinsic. Falls back to the previous motion at the last frame.
inline RigidTransform frame_motion(const io::SensorRecord& sensor,
                                   const RigidTransform& extrinsic,
                                   std::size_t frame_index) {
  std::size_t n = sensor.frames.size();
  std::size_t a = frame_index;
  std::size_t b = frame_index + 1;
  if (b >= n) {
    if (n < 2) return RigidTransform{};
    a = n - 2;
    b = n - 1;
  }
  const auto& pose_a = sensor.frames[a].pose;
  const auto& pose_b = sensor.frames[b].pose;
  if (!pose_a || !pose_b) {
    throw std::invalid_argument(
        "motion distortion requires per-frame poses for sensor '" +
        sensor.sensor_id + "'");
  }
  RigidTransform body_motion = compose(invert(*pose_a), *pose_b);
  RigidTransform s = extrinsic;
  s.frame_from.clear();  // conjugation ignores frame tags
  s.frame_to.clear();
  body_motion.frame_from.clear();
  body_motion.frame_to.clear();
  return compose(invert(s), compose(body_motion, s));
}

inline void copy_file_exact(const fs::path& from, const fs::path& to) {
  fs::create_directories(to.parent_path());
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

}  // namespace detail

/// Runs the corruption pipeline: mirrors the manifest's dataset under
/// output_root/data with every enabled noise applied, and writes
/// output_root/ledger.json recording every sampled parameter and digest.
/// Frames are processed by `workers` threads; results do not depend on the
/// worker count.
inline CorruptionOutcome run_corruption(const fs::path& manifest_path,
                                        const RunConfig& config,
                                        const fs::path& output_root,
                                        int workers = 1) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  io::ScenarioManifest manifest = io::load_manifest(manifest_path);
  const std::string& scenario = manifest.scenario_id;

  CorruptionOutcome outcome;
  outcome.data_root = output_root / "data";
  outcome.ledger_path = output_root / "ledger.json";
  fs::create_directories(outcome.data_root);

  io::CorruptionLedger& ledger = outcome.ledger;
  ledger.root_seed = config.root_seed;
  ledger.tool_version = kToolVersion;
  ledger.config = run_config_to_json(config);

  // --- Per-sensor setup (serial; all cross-frame randomness lives here) ---
  std::vector<detail::SensorState> states;
  bool manifest_rewritten = false;
  for (io::AgentRecord& agent : manifest.agents) {
    for (io::SensorRecord& sensor : agent.sensors) {
      detail::SensorState st;
      st.agent = &agent;
      st.sensor = &sensor;
      st.kinds = config.kinds_for(agent.kind, sensor.kind);
      st.calibration =
          io::read_calibration(manifest.root / sensor.calibration);
      if (!sensor.frames.empty()) st.t0 = sensor.frames.front().timestamp_s;
      if (sensor.kind == io::SensorKind::kCamera &&
          !st.calibration.intrinsics) {
        throw ParseError("camera sensor '" + sensor.sensor_id +
                         "' has no intrinsics in " +
                         (manifest.root / sensor.calibration).string());
      }

      if (st.has("vibration")) {
        RandomStream rng = vibration_phase_stream(config.root_seed, scenario,
                                                  agent.agent_id,
                                                  sensor.sensor_id);
        st.vibration =
            VibrationSpec::with_sampled_phases(config.vibration, rng);
        io::LedgerEntry e{scenario, agent.agent_id, sensor.sensor_id, "",
                          "vibration",
                          json{{"phase_roll", st.vibration.phase_roll},
                               {"phase_pitch", st.vibration.phase_pitch},
                               {"phase_yaw", st.vibration.phase_yaw},
                               {"image_phase_u", st.vibration.image_phase_u},
                               {"image_phase_v", st.vibration.image_phase_v}},
                          {}, {}};
        ledger.entries.push_back(std::move(e));
      }
      if (st.has("systematic_error")) {
        RandomStream rng = systematic_stream(config.root_seed, scenario,
                                             agent.agent_id, sensor.sensor_id);
        int w = 0, h = 0;
        if (sensor.kind == io::SensorKind::kCamera) {
          st.systematic =
              systematic_offset(config.systematic, *st.calibration.intrinsics,
                                rng);
          w = st.calibration.intrinsics->width;
          h = st.calibration.intrinsics->height;
        } else {
          st.systematic = systematic_offset(config.systematic, rng);
        }
        json params = detail::calibration_sample_to_json(st.systematic.sample);
        params["image_du_px"] = st.systematic.image_du;
        params["image_dv_px"] = st.systematic.image_dv;
        params["image_width"] = w;
        params["image_height"] = h;
        ledger.entries.push_back(io::LedgerEntry{
            scenario, agent.agent_id, sensor.sensor_id, "",
            "systematic_error", std::move(params), {}, {}});
      }

      bool touched = false;
      if (sensor.kind == io::SensorKind::kLidar) {
        touched = st.has("motion_distortion") || st.has("vibration") ||
                  st.has("systematic_error");
      } else {
        touched = st.has("vibration") || st.has("systematic_error") ||
                  st.has("perspective_distortion");
      }
      st.payload_touched = touched;
      if (st.has("calibration_error") || st.has("time_desync")) {
        manifest_rewritten = true;
      }
      if (st.has("calibration_error")) {
        for (io::FrameRecord& frame : sensor.frames) {
          frame.calibration = "noisy_calib/" + agent.agent_id + "/" +
                              sensor.sensor_id + "/" + frame.frame_id +
                              ".calib";
        }
      }
      states.push_back(std::move(st));
    }
  }

  // Time desynchronization: pair each camera with the agent's first LiDAR.
  for (io::AgentRecord& agent : manifest.agents) {
    const io::SensorRecord* lidar = nullptr;
    for (const io::SensorRecord& s : agent.sensors) {
      if (s.kind == io::SensorKind::kLidar) {
        lidar = &s;
        break;
      }
    }
    if (!lidar) continue;
    for (io::SensorRecord& s : agent.sensors) {
      if (s.kind != io::SensorKind::kCamera) continue;
      if (!config.is_enabled(agent.kind, io::SensorKind::kCamera,
                             "time_desync")) {
        continue;
      }
      std::string pair_key = lidar->sensor_id + "|" + s.sensor_id;
      RandomStream rng = desync_stream(config.root_seed, scenario,
                                       agent.agent_id, pair_key);
      DesyncPairing pairing = desynchronize(lidar->timestamps(),
                                            s.timestamps(), config.time_sync,
                                            rng);
      agent.frame_pairings.push_back(io::FramePairing{
          lidar->sensor_id, s.sensor_id, pairing.camera_index_per_lidar});
      ledger.entries.push_back(io::LedgerEntry{
          scenario, agent.agent_id, pair_key, "", "time_desync",
          json{{"delay_s", pairing.delay_s},
               {"direction", config.time_sync.direction ==
                                     TimeSyncSpec::Direction::kCameraDelayed
                                 ? "camera_delayed"
                                 : "lidar_delayed"},
               {"camera_index_per_lidar", pairing.camera_index_per_lidar}},
          {}, {}});
    }
  }

  // --- Frame tasks ---
  struct Task {
    const detail::SensorState* state;
    std::size_t frame_index;
  };
  struct TaskResult {
    std::vector<io::LedgerEntry> entries;
    std::string error;
  };
  std::vector<Task> tasks;
  for (const detail::SensorState& st : states) {
    for (std::size_t i = 0; i < st.sensor->frames.size(); ++i) {
      tasks.push_back(Task{&st, i});
    }
  }
  std::vector<TaskResult> results(tasks.size());

  auto process_task = [&](const Task& task) -> std::vector<io::LedgerEntry> {
    const detail::SensorState& st = *task.state;
    const io::AgentRecord& agent = *st.agent;
    const io::SensorRecord& sensor = *st.sensor;
    const io::FrameRecord& frame = sensor.frames[task.frame_index];
    const fs::path in_file = manifest.root / frame.file;
    const fs::path out_file = outcome.data_root / frame.file;
    fs::create_directories(out_file.parent_path());

    std::vector<io::LedgerEntry> entries;
    std::string in_digest = io::sha256_file(in_file);
    double t_rel = frame.timestamp_s - st.t0;

    auto make_entry = [&](const std::string& kind, json params) {
      io::LedgerEntry e{scenario, agent.agent_id, sensor.sensor_id,
                        frame.frame_id, kind, std::move(params), {}, {}};
      e.inputs.emplace_back(frame.file, in_digest);
      return e;
    };

    if (!st.payload_touched) {
      detail::copy_file_exact(in_file, out_file);
    } else if (sensor.kind == io::SensorKind::kLidar) {
      PointCloud cloud = io::read_point_cloud(in_file);
      if (st.has("motion_distortion")) {
        RigidTransform motion = detail::frame_motion(
            sensor, st.calibration.extrinsic, task.frame_index);
        cloud = motion_distort(cloud, motion, config.motion);
        entries.push_back(make_entry(
            "motion_distortion",
            json{{"ego_motion", detail::transform_to_json(motion)},
                 {"sector_count", config.motion.sector_count}}));
      }
      if (st.has("vibration")) {
        RandomStream rng = vibration_frame_stream(
            config.root_seed, scenario, agent.agent_id, sensor.sensor_id,
            frame.frame_id);
        VibratedTransform vib =
            vibration_transform(RigidTransform{}, t_rel, st.vibration, rng);
        cloud = transform_points(vib.transform, cloud);
        entries.push_back(make_entry(
            "vibration",
            json{{"t_s", t_rel},
                 {"angle_offsets_rad",
                  {vib.sample.angle_offsets_rad.x(),
                   vib.sample.angle_offsets_rad.y(),
                   vib.sample.angle_offsets_rad.z()}},
                 {"dt_x_m", vib.sample.translation_offsets_m.x()},
                 {"dt_y_m", vib.sample.translation_offsets_m.y()},
                 {"dt_z_m", vib.sample.translation_offsets_m.z()}}));
      }
      if (st.has("systematic_error")) {
        cloud = transform_points(st.systematic.pose_offset, cloud);
      }
      io::write_point_cloud(cloud, out_file, io::PcdEncoding::kBinary);
    } else {
      ImageBuffer img = io::read_image(in_file);
      const CameraModel& cam = *st.calibration.intrinsics;
      if (st.has("perspective_distortion")) {
        Eigen::Matrix3d h = perspective_homography(img.width, img.height,
                                                   config.perspective.alpha);
        img = warp_image(img, h);
        entries.push_back(make_entry(
            "perspective_distortion",
            json{{"alpha", config.perspective.alpha}}));
      }
      double du = 0.0, dv = 0.0;
      if (st.has("vibration")) {
        auto [vu, vv] = vibration_image_shift(t_rel, cam, st.vibration);
        du += vu;
        dv += vv;
        entries.push_back(make_entry(
            "vibration",
            json{{"t_s", t_rel}, {"image_du_px", vu}, {"image_dv_px", vv}}));
      }
      if (st.has("systematic_error")) {
        du += st.systematic.image_du;
        dv += st.systematic.image_dv;
      }
      if (du != 0.0 || dv != 0.0) {
        img = shift_image(img, du, dv);
      }
      io::write_image(img, out_file);
    }

    if (st.has("calibration_error")) {
      RandomStream rng = calibration_stream(config.root_seed, scenario,
                                            agent.agent_id, sensor.sensor_id,
                                            frame.frame_id);
      PerturbedTransform perturbed =
          perturb_calibration(st.calibration.extrinsic, config.calibration,
                              rng);
      io::CalibrationRecord noisy = st.calibration;
      noisy.extrinsic = perturbed.transform;
      const std::string& rel = frame.calibration;  // set during setup
      fs::path calib_out = outcome.data_root / rel;
      fs::create_directories(calib_out.parent_path());
      io::write_calibration(noisy, calib_out);
      io::LedgerEntry e{scenario, agent.agent_id, sensor.sensor_id,
                        frame.frame_id, "calibration_error",
                        detail::calibration_sample_to_json(perturbed.sample),
                        {}, {}};
      e.inputs.emplace_back(sensor.calibration,
                            io::sha256_file(manifest.root /
                                            sensor.calibration));
      e.outputs.emplace_back(rel, io::sha256_file(calib_out));
      entries.push_back(std::move(e));
    }

    // Record the payload output digest on every payload entry of the frame.
    std::string out_digest = io::sha256_file(out_file);
    for (io::LedgerEntry& e : entries) {
      if (e.noise_kind != "calibration_error") {
        e.outputs.emplace_back(frame.file, out_digest);
      }
    }
    if (entries.empty() && st.payload_touched) {
      // Payload was rewritten by sensor-scope noise only (e.g. systematic
      // error alone); still record the digest pair.
      io::LedgerEntry e{scenario,       agent.agent_id, sensor.sensor_id,
                        frame.frame_id, "payload",      json::object(),
                        {},             {}};
      e.inputs.emplace_back(frame.file, in_digest);
      e.outputs.emplace_back(frame.file, out_digest);
      entries.push_back(std::move(e));
    }
    return entries;
  };

  std::atomic<std::size_t> next_task{0};
  auto worker_loop = [&]() {
    for (;;) {
      std::size_t i = next_task.fetch_add(1);
      if (i >= tasks.size()) break;
      try {
        results[i].entries = process_task(tasks[i]);
      } catch (const std::exception& e) {
        const Task& t = tasks[i];
        results[i].error = t.state->sensor->sensor_id + "/" +
                           t.state->sensor->frames[t.frame_index].frame_id +
                           ": " + e.what();
      }
    }
  };
  if (workers == 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker_loop);
    for (std::thread& t : pool) t.join();
  }

  for (TaskResult& r : results) {
    if (!r.error.empty()) {
      outcome.frame_errors.push_back(r.error);
    }
    for (io::LedgerEntry& e : r.entries) {
      ledger.entries.push_back(std::move(e));
    }
  }

  // Calibration files and the manifest itself.
  for (const io::AgentRecord& agent : manifest.agents) {
    for (const io::SensorRecord& sensor : agent.sensors) {
      detail::copy_file_exact(manifest.root / sensor.calibration,
                              outcome.data_root / sensor.calibration);
    }
  }
  if (manifest_rewritten) {
    io::save_manifest(manifest,
                      outcome.data_root / manifest_path.filename());
  } else {
    detail::copy_file_exact(manifest_path,
                            outcome.data_root / manifest_path.filename());
  }

  // Deterministic ledger order regardless of scheduling.
  std::stable_sort(ledger.entries.begin(), ledger.entries.end(),
                   [](const io::LedgerEntry& a, const io::LedgerEntry& b) {
                     return std::tie(a.scenario, a.agent, a.sensor, a.frame,
                                     a.noise_kind) <
                            std::tie(b.scenario, b.agent, b.sensor, b.frame,
                                     b.noise_kind);
                   });
  io::write_ledger(ledger, outcome.ledger_path);
  return outcome;
}

// ============================================================================
// Verification
// ============================================================================

struct VerifyReport {
  std::vector<std::string> digest_mismatches;
  std::vector<std::string> missing_files;
  std::vector<std::string> param_mismatches;

  bool clean() const {
    return digest_mismatches.empty() && missing_files.empty() &&
           param_mismatches.empty();
  }
};

/// Re-derives the random draws of a ledger entry from (seed, path, spec).
/// Returns an object holding only the re-derivable keys; deterministic
/// derived values (sine offsets, ego motion) are covered by digests instead.
inline json derive_random_params(const RunConfig& config,
                                 const io::LedgerEntry& e) {
  if (e.noise_kind == "calibration_error") {
    RandomStream rng = calibration_stream(config.root_seed, e.scenario,
                                          e.agent, e.sensor, e.frame);
    PerturbedTransform p =
        perturb_calibration(RigidTransform{}, config.calibration, rng);
    return detail::calibration_sample_to_json(p.sample);
  }
  if (e.noise_kind == "vibration" && e.frame.empty()) {
    RandomStream rng = vibration_phase_stream(config.root_seed, e.scenario,
                                              e.agent, e.sensor);
    VibrationSpec s = VibrationSpec::with_sampled_phases(config.vibration, rng);
    return json{{"phase_roll", s.phase_roll},
                {"phase_pitch", s.phase_pitch},
                {"phase_yaw", s.phase_yaw},
                {"image_phase_u", s.image_phase_u},
                {"image_phase_v", s.image_phase_v}};
  }
  if (e.noise_kind == "vibration" && !e.frame.empty() &&
      e.params.contains("dt_x_m")) {
    // LiDAR vibration: three Gaussian translation draws.
    RandomStream rng = vibration_frame_stream(config.root_seed, e.scenario,
                                              e.agent, e.sensor, e.frame);
    VibratedTransform v =
        vibration_transform(RigidTransform{}, 0.0, config.vibration, rng);
    return json{{"dt_x_m", v.sample.translation_offsets_m.x()},
                {"dt_y_m", v.sample.translation_offsets_m.y()},
                {"dt_z_m", v.sample.translation_offsets_m.z()}};
  }
  if (e.noise_kind == "systematic_error") {
    RandomStream rng =
        systematic_stream(config.root_seed, e.scenario, e.agent, e.sensor);
    int w = e.params.value("image_width", 0);
    int h = e.params.value("image_height", 0);
    SystematicOffset off;
    if (w > 0 && h > 0) {
      CameraModel cam(1.0, 1.0, 0.0, 0.0, w, h);
      off = systematic_offset(config.systematic, cam, rng);
    } else {
      off = systematic_offset(config.systematic, rng);
    }
    json out = detail::calibration_sample_to_json(off.sample);
    out["image_du_px"] = off.image_du;
    out["image_dv_px"] = off.image_dv;
    return out;
  }
  if (e.noise_kind == "time_desync") {
    RandomStream rng =
        desync_stream(config.root_seed, e.scenario, e.agent, e.sensor);
    return json{{"delay_s", rng.uniform(0.0, config.time_sync.max_delay_s)}};
  }
  return json::object();
}

/// Confirms that an output tree still matches its ledger: recomputes every
/// output digest and re-derives every sampled parameter from the recorded
/// seed and config.
inline VerifyReport verify_run(const fs::path& output_root,
                               const io::CorruptionLedger& ledger) {
  VerifyReport report;
  RunConfig config = run_config_from_json(ledger.config);
  config.root_seed = ledger.root_seed;
  fs::path data_root = output_root / "data";

  for (const io::LedgerEntry& e : ledger.entries) {
    for (const auto& [file, digest] : e.outputs) {
      fs::path p = data_root / file;
      if (!fs::exists(p)) {
        report.missing_files.push_back(file);
        continue;
      }
      if (io::sha256_file(p) != digest) {
        report.digest_mismatches.push_back(file);
      }
    }
    json expected = derive_random_params(config, e);
    for (const auto& [key, value] : expected.items()) {
      if (!e.params.contains(key) || e.params.at(key) != value) {
        report.param_mismatches.push_back(e.agent + "/" + e.sensor + "/" +
                                          e.frame + "/" + e.noise_kind + "." +
                                          key);
      }
    }
  }
  // Duplicates arise when several entries reference one payload file.
  for (auto* v : {&report.digest_mismatches, &report.missing_files}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return report;
}

// ============================================================================
// Stats
// ============================================================================

struct StatsReport {
  json summary;
  std::vector<std::string> bound_violations;

  bool bounds_ok() const { return bound_violations.empty(); }
};

/// Histograms and ranges of every sampled scalar per noise kind, bound
/// checks against the recorded config, and (when the source manifest is
/// supplied) projected-pixel misalignment aggregates for the perturbed
/// camera extrinsics.
inline StatsReport compute_stats(
    const io::CorruptionLedger& ledger,
    const std::optional<fs::path>& manifest_path = std::nullopt) {
  StatsReport report;
  RunConfig config = run_config_from_json(ledger.config);

  struct Acc {
    std::size_t count = 0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::vector<double> values;
  };
  std::map<std::string, Acc> acc;

  for (const io::LedgerEntry& e : ledger.entries) {
    for (const auto& [key, value] : e.params.items()) {
      if (!value.is_number()) continue;
      double v = value.get<double>();
      Acc& a = acc[e.noise_kind + "." + key];
      a.count++;
      a.min = std::min(a.min, v);
      a.max = std::max(a.max, v);
      a.sum += v;
      a.values.push_back(v);
    }
  }

  json stats = json::object();
  for (auto& [name, a] : acc) {
    json h = json::array();
    constexpr int kBins = 10;
    std::array<std::size_t, kBins> bins{};
    double lo = a.min, hi = a.max;
    double span = hi > lo ? hi - lo : 1.0;
    for (double v : a.values) {
      int b = static_cast<int>((v - lo) / span * kBins);
      bins[std::clamp(b, 0, kBins - 1)]++;
    }
    for (std::size_t b : bins) h.push_back(b);
    stats[name] = json{{"count", a.count},
                       {"min", a.min},
                       {"max", a.max},
                       {"mean", a.sum / static_cast<double>(a.count)},
                       {"histogram", h}};
  }
  report.summary["params"] = std::move(stats);

  auto check_bound = [&](const std::string& key, double bound) {
    auto it = acc.find(key);
    if (it == acc.end()) return;
    if (it->second.min < -bound - 1e-12 || it->second.max > bound + 1e-12) {
      report.bound_violations.push_back(
          key + " outside [" + std::to_string(-bound) + ", " +
          std::to_string(bound) + "]");
    }
  };
  for (const char* axis : {"d_roll_deg", "d_pitch_deg", "d_yaw_deg"}) {
    check_bound(std::string("calibration_error.") + axis,
                config.calibration.rot_range_deg);
    check_bound(std::string("systematic_error.") + axis,
                config.systematic.rot_range_deg);
  }
  for (const char* axis : {"d_tx_m", "d_ty_m", "d_tz_m"}) {
    check_bound(std::string("calibration_error.") + axis,
                config.calibration.trans_range_m);
    check_bound(std::string("systematic_error.") + axis,
                config.systematic.trans_range_m);
  }
  if (auto it = acc.find("time_desync.delay_s"); it != acc.end()) {
    if (it->second.min < 0.0 ||
        it->second.max > config.time_sync.max_delay_s + 1e-12) {
      report.bound_violations.push_back("time_desync.delay_s outside [0, " +
                                        std::to_string(
                                            config.time_sync.max_delay_s) +
                                        "]");
    }
  }

  if (manifest_path) {
    io::ScenarioManifest manifest = io::load_manifest(*manifest_path);
    std::vector<double> means;
    std::vector<double> p95s;
    for (const io::AgentRecord& agent : manifest.agents) {
      const io::SensorRecord* lidar = nullptr;
      for (const io::SensorRecord& s : agent.sensors) {
        if (s.kind == io::SensorKind::kLidar) {
          lidar = &s;
          break;
        }
      }
      if (!lidar) continue;
      for (const io::SensorRecord& cam_sensor : agent.sensors) {
        if (cam_sensor.kind != io::SensorKind::kCamera) continue;
        io::CalibrationRecord calib =
            io::read_calibration(manifest.root / cam_sensor.calibration);
        if (!calib.intrinsics) continue;
        for (const io::LedgerEntry& e : ledger.entries) {
          if (e.noise_kind != "calibration_error" ||
              e.agent != agent.agent_id || e.sensor != cam_sensor.sensor_id ||
              e.frame.empty()) {
            continue;
          }
          // Find the same-index LiDAR frame for the projected cloud.
          std::size_t idx = 0;
          bool found = false;
          for (std::size_t i = 0; i < cam_sensor.frames.size(); ++i) {
            if (cam_sensor.frames[i].frame_id == e.frame) {
              idx = i;
              found = true;
              break;
            }
          }
          if (!found || idx >= lidar->frames.size()) continue;
          PointCloud cloud = io::read_point_cloud(manifest.root /
                                                  lidar->frames[idx].file);
          RigidTransform noisy = detail::apply_pose_offsets(
              calib.extrinsic,
              Eigen::Vector3d(deg2rad(e.params.at("d_roll_deg").get<double>()),
                              deg2rad(e.params.at("d_pitch_deg").get<double>()),
                              deg2rad(e.params.at("d_yaw_deg").get<double>())),
              Eigen::Vector3d(e.params.at("d_tx_m").get<double>(),
                              e.params.at("d_ty_m").get<double>(),
                              e.params.at("d_tz_m").get<double>()));
          try {
            MisalignmentStats m = misalignment_metric(
                cloud, *calib.intrinsics, calib.extrinsic, noisy);
            means.push_back(m.mean_px);
            p95s.push_back(m.p95_px);
          } catch (const EmptyOverlapError&) {
            // No overlap for this frame; skip it.
          }
        }
      }
    }
    if (!means.empty()) {
      double mean_sum = 0.0, p95_max = 0.0;
      for (double v : means) mean_sum += v;
      for (double v : p95s) p95_max = std::max(p95_max, v);
      report.summary["misalignment"] =
          json{{"frames", means.size()},
               {"mean_px", mean_sum / static_cast<double>(means.size())},
               {"max_p95_px", p95_max}};
    }
  }
  return report;
}

}  // namespace v2xnoise

#endif  // V2XNOISE_PIPELINE_HPP
