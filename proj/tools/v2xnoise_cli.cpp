// Command-line front end for the V2X sensor-noise toolkit.
//
// Subcommands:
//   corrupt   apply the configured noise recipe to a scenario
//   project   emit sparse + max-pooled depth rasters for selected frames
//   depthvar  emit 5-channel depth variation rasters
//   verify    check an output tree against its corruption ledger
//   stats     summarize every sampled parameter in a ledger
//
// Exit codes: 0 success, 1 partial failure, 2 invalid input.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "v2xnoise/v2xnoise.hpp"

namespace fs = std::filesystem;
using namespace v2xnoise;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitInvalidInput = 2;

struct FrameJob {
  const io::AgentRecord* agent;
  const io::SensorRecord* camera;
  const io::SensorRecord* lidar;
  io::CalibrationRecord calibration;
  std::size_t frame_index;
};

/// Resolves (agent, camera, paired lidar, frame indices) for the raster
/// commands. frame_selector is a frame_id or "all".
std::vector<FrameJob> resolve_frames(const io::ScenarioManifest& manifest,
                                     const std::string& agent_id,
                                     const std::string& camera_id,
                                     const std::string& frame_selector) {
  std::vector<FrameJob> jobs;
  for (const io::AgentRecord& agent : manifest.agents) {
    if (!agent_id.empty() && agent.agent_id != agent_id) continue;
    const io::SensorRecord* lidar = nullptr;
    for (const io::SensorRecord& s : agent.sensors) {
      if (s.kind == io::SensorKind::kLidar) {
        lidar = &s;
        break;
      }
    }
    for (const io::SensorRecord& s : agent.sensors) {
      if (s.kind != io::SensorKind::kCamera) continue;
      if (!camera_id.empty() && s.sensor_id != camera_id) continue;
      if (!lidar) {
        throw std::invalid_argument("agent '" + agent.agent_id +
                                    "' has no LiDAR to project from");
      }
      io::CalibrationRecord calib =
          io::read_calibration(manifest.root / s.calibration);
      if (!calib.intrinsics) {
        throw ParseError("missing intrinsics for sensor '" + s.sensor_id +
                         "'");
      }
      for (std::size_t i = 0; i < s.frames.size(); ++i) {
        if (frame_selector != "all" &&
            s.frames[i].frame_id != frame_selector) {
          continue;
        }
        if (i >= lidar->frames.size()) continue;
        jobs.push_back(FrameJob{&agent, &s, lidar, calib, i});
      }
    }
  }
  if (jobs.empty()) {
    throw std::invalid_argument("no frames matched the selection");
  }
  return jobs;
}

int run_rasters(const std::string& manifest_path, const std::string& out_dir,
                const std::string& agent_id, const std::string& camera_id,
                const std::string& frame_selector, bool variation,
                bool preview) {
  io::ScenarioManifest manifest = io::load_manifest(manifest_path);
  fs::create_directories(out_dir);
  auto jobs = resolve_frames(manifest, agent_id, camera_id, frame_selector);
  for (const FrameJob& job : jobs) {
    PointCloud cloud = io::read_point_cloud(
        manifest.root / job.lidar->frames[job.frame_index].file);
    const std::string& frame_id =
        job.camera->frames[job.frame_index].frame_id;
    std::string stem = job.agent->agent_id + "_" + job.camera->sensor_id +
                       "_" + frame_id;
    SparseDepthMap sparse = render_sparse_depth(
        cloud, *job.calibration.intrinsics, job.calibration.extrinsic);
    DepthAggregationMap aggr = densify_depth_max(sparse);
    if (variation) {
      DepthVariationMap var = depth_gradients(aggr);
      io::write_raster(var, fs::path(out_dir) / (stem + "_var.dvr"));
      if (preview) {
        io::write_gray16(var.channels[0].depth, var.channels[0].valid,
                         var.width, var.height,
                         fs::path(out_dir) / (stem + "_var_d.png"));
      }
    } else {
      io::write_raster(sparse, fs::path(out_dir) / (stem + "_sparse.dvr"));
      io::write_raster(aggr, fs::path(out_dir) / (stem + "_aggr.dvr"));
      if (preview) {
        io::write_gray16(sparse.depth, sparse.valid, sparse.width,
                         sparse.height,
                         fs::path(out_dir) / (stem + "_sparse.png"));
        io::write_gray16(aggr.depth, aggr.valid, aggr.width, aggr.height,
                         fs::path(out_dir) / (stem + "_aggr.png"));
      }
    }
    std::cout << stem << ": ok\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"V2X multi-sensor noise injection and depth alignment rasters"};
  app.require_subcommand(1);

  std::string manifest_path, output, config_path, agent_id, camera_id;
  std::string frame_selector = "all";
  std::string ledger_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;
  bool preview = false;

  auto* corrupt = app.add_subcommand("corrupt", "apply the noise recipe");
  corrupt->add_option("--manifest", manifest_path, "scenario manifest")
      ->required();
  corrupt->add_option("--output", output, "output root")->required();
  corrupt->add_option("--config", config_path,
                      "run config JSON (default: paper recipe)");
  corrupt->add_option("--seed", seed, "root seed (overrides config)")
      ->each([&](const std::string&) { seed_given = true; });
  corrupt->add_option("--workers", workers, "worker threads")
      ->check(CLI::PositiveNumber);

  auto* project = app.add_subcommand("project", "sparse + pooled depth maps");
  auto* depthvar = app.add_subcommand("depthvar", "depth variation rasters");
  for (CLI::App* cmd : {project, depthvar}) {
    cmd->add_option("--manifest", manifest_path, "scenario manifest")
        ->required();
    cmd->add_option("--output", output, "output directory")->required();
    cmd->add_option("--agent", agent_id, "agent id (default: all)");
    cmd->add_option("--camera", camera_id, "camera sensor id (default: all)");
    cmd->add_option("--frame", frame_selector, "frame id or 'all'");
    cmd->add_flag("--preview", preview, "also write 16-bit grayscale PNGs");
  }

  auto* verify = app.add_subcommand("verify", "check outputs against ledger");
  verify->add_option("--output", output, "corruption output root")->required();
  verify->add_option("--ledger", ledger_path,
                     "ledger path (default: <output>/ledger.json)");

  auto* stats = app.add_subcommand("stats", "summarize sampled parameters");
  stats->add_option("--ledger", ledger_path, "ledger path")->required();
  stats->add_option("--manifest", manifest_path,
                    "clean manifest, enables misalignment aggregates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (corrupt->parsed()) {
      RunConfig config = config_path.empty() ? default_run_config()
                                             : load_run_config(config_path);
      if (seed_given || config_path.empty()) config.root_seed = seed;
      CorruptionOutcome outcome =
          run_corruption(manifest_path, config, output, workers);
      if (!outcome.success()) {
        for (const std::string& err : outcome.frame_errors) {
          std::cerr << "frame failed: " << err << "\n";
        }
        return kExitPartialFailure;
      }
      std::cout << "corrupted " << manifest_path << " -> "
                << outcome.data_root.string() << " ("
                << outcome.ledger.entries.size() << " ledger entries)\n";
      return kExitOk;
    }
    if (project->parsed() || depthvar->parsed()) {
      return run_rasters(manifest_path, output, agent_id, camera_id,
                         frame_selector, depthvar->parsed(), preview);
    }
    if (verify->parsed()) {
      fs::path lp = ledger_path.empty() ? fs::path(output) / "ledger.json"
                                        : fs::path(ledger_path);
      io::CorruptionLedger ledger = io::read_ledger(lp);
      VerifyReport report = verify_run(output, ledger);
      for (const std::string& f : report.missing_files) {
        std::cout << "missing: " << f << "\n";
      }
      for (const std::string& f : report.digest_mismatches) {
        std::cout << "digest mismatch: " << f << "\n";
      }
      for (const std::string& p : report.param_mismatches) {
        std::cout << "parameter mismatch: " << p << "\n";
      }
      if (report.clean()) {
        std::cout << "verification passed (" << ledger.entries.size()
                  << " entries)\n";
        return kExitOk;
      }
      return kExitPartialFailure;
    }
    if (stats->parsed()) {
      io::CorruptionLedger ledger = io::read_ledger(ledger_path);
      std::optional<fs::path> mp;
      if (!manifest_path.empty()) mp = manifest_path;
      StatsReport report = compute_stats(ledger, mp);
      std::cout << report.summary.dump(2) << "\n";
      for (const std::string& v : report.bound_violations) {
        std::cerr << "bound violation: " << v << "\n";
      }
      return report.bounds_ok() ? kExitOk : kExitPartialFailure;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartialFailure;
  }
  return kExitInvalidInput;
}
