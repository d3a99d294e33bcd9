#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "v2xnoise/config.hpp"
#include "v2xnoise/io/calibration.hpp"
#include "v2xnoise/io/digest.hpp"
#include "v2xnoise/io/ledger.hpp"
#include "v2xnoise/io/manifest.hpp"
#include "v2xnoise/io/pcd.hpp"
#include "v2xnoise/io/png.hpp"
#include "v2xnoise/io/raster.hpp"

namespace fs = std::filesystem;
using namespace v2xnoise;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::path(testing::TempDir()) / ("v2xnoise_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

PointCloud sample_cloud(bool with_azimuth, bool with_timestamp) {
  PointCloud cloud;
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  for (int i = 0; i < 257; ++i) {
    cloud.points.push_back(
        {coord(gen), coord(gen), coord(gen), std::abs(coord(gen))});
    if (with_azimuth) cloud.azimuth.push_back(std::abs(coord(gen)) / 10.0);
    if (with_timestamp) cloud.timestamp.push_back(i * 1e-4);
  }
  return cloud;
}

}  // namespace

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

TEST(Pcd, BinaryRoundTripIsBitExact) {
  fs::path dir = temp_dir("pcd_bin");
  PointCloud cloud = sample_cloud(true, true);
  io::write_point_cloud(cloud, dir / "a.pcd", io::PcdEncoding::kBinary);
  PointCloud back = io::read_point_cloud(dir / "a.pcd");
  ASSERT_EQ(back.size(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_EQ(back.points[i].x, cloud.points[i].x);
    EXPECT_EQ(back.points[i].y, cloud.points[i].y);
    EXPECT_EQ(back.points[i].z, cloud.points[i].z);
    EXPECT_EQ(back.points[i].intensity, cloud.points[i].intensity);
    EXPECT_EQ(back.azimuth[i], cloud.azimuth[i]);
    EXPECT_EQ(back.timestamp[i], cloud.timestamp[i]);
  }
  // Re-serialization reproduces the same bytes.
  io::write_point_cloud(back, dir / "b.pcd", io::PcdEncoding::kBinary);
  EXPECT_EQ(slurp(dir / "a.pcd"), slurp(dir / "b.pcd"));
}

TEST(Pcd, AsciiRoundTripWithinPrintPrecision) {
  fs::path dir = temp_dir("pcd_ascii");
  PointCloud cloud = sample_cloud(false, false);
  io::write_point_cloud(cloud, dir / "a.pcd", io::PcdEncoding::kAscii);
  PointCloud back = io::read_point_cloud(dir / "a.pcd");
  ASSERT_EQ(back.size(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_NEAR(back.points[i].x, cloud.points[i].x, 5e-7);
    EXPECT_NEAR(back.points[i].z, cloud.points[i].z, 5e-7);
  }
}

TEST(Pcd, TruncatedBinaryPayloadRejected) {
  fs::path dir = temp_dir("pcd_trunc");
  PointCloud cloud = sample_cloud(false, false);
  io::write_point_cloud(cloud, dir / "a.pcd", io::PcdEncoding::kBinary);
  std::string bytes = slurp(dir / "a.pcd");
  std::ofstream(dir / "cut.pcd", std::ios::binary)
      << bytes.substr(0, bytes.size() - 5);
  EXPECT_THROW(io::read_point_cloud(dir / "cut.pcd"), ParseError);
}

TEST(Pcd, UnsupportedLayoutRejectedWithParseError) {
  fs::path dir = temp_dir("pcd_layout");
  std::ofstream(dir / "bad.pcd")
      << "FIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nWIDTH 0\nPOINTS 0\n"
         "DATA ascii\n";
  EXPECT_THROW(io::read_point_cloud(dir / "bad.pcd"), ParseError);
  std::ofstream(dir / "f32.pcd")
      << "FIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nWIDTH 0\n"
         "POINTS 0\nDATA ascii\n";
  EXPECT_THROW(io::read_point_cloud(dir / "f32.pcd"), ParseError);
}

TEST(Pcd, NonFiniteCoordinateRejected) {
  fs::path dir = temp_dir("pcd_nan");
  std::ofstream(dir / "nan.pcd")
      << "FIELDS x y z intensity\nSIZE 8 8 8 8\nTYPE F F F F\nWIDTH 1\n"
         "POINTS 1\nDATA ascii\nnan 0 0 1\n";
  EXPECT_THROW(io::read_point_cloud(dir / "nan.pcd"), ParseError);
}

TEST(Pcd, MissingFileGivesIoError) {
  EXPECT_THROW(io::read_point_cloud("/nonexistent/x.pcd"), IoError);
}

// ---------------------------------------------------------------------------
// PNG images
// ---------------------------------------------------------------------------

TEST(Png, RoundTripPreservesPixels) {
  fs::path dir = temp_dir("png_rt");
  ImageBuffer img(40, 30);
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> byte(0, 255);
  for (std::uint8_t& b : img.data) b = static_cast<std::uint8_t>(byte(gen));
  io::write_image(img, dir / "a.png");
  ImageBuffer back = io::read_image(dir / "a.png");
  EXPECT_TRUE(back.same_pixels(img));
}

TEST(Png, WriterIsByteDeterministic) {
  fs::path dir = temp_dir("png_det");
  ImageBuffer img(25, 17);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] = static_cast<std::uint8_t>((i * 31) & 0xFF);
  }
  io::write_image(img, dir / "a.png");
  io::write_image(img, dir / "b.png");
  EXPECT_EQ(slurp(dir / "a.png"), slurp(dir / "b.png"));
}

TEST(Png, CorruptFileRejected) {
  fs::path dir = temp_dir("png_bad");
  std::ofstream(dir / "bad.png", std::ios::binary) << "not a png at all";
  EXPECT_THROW(io::read_image(dir / "bad.png"), ParseError);
}

TEST(Png, Gray16PreviewIsWritten) {
  fs::path dir = temp_dir("png_gray");
  DepthMap map(8, 8);
  map.set(3, 4, 12.0f);
  map.set(5, 5, 30.0f);
  io::write_gray16(map.depth, map.valid, map.width, map.height,
                   dir / "d.png");
  EXPECT_GT(fs::file_size(dir / "d.png"), 0u);
}

// ---------------------------------------------------------------------------
// Rasters
// ---------------------------------------------------------------------------

TEST(Raster, RoundTripSingleChannel) {
  fs::path dir = temp_dir("raster_one");
  DepthMap map(13, 9);
  std::mt19937 gen(23);
  std::uniform_real_distribution<float> depth(0.1f, 90.0f);
  std::bernoulli_distribution keep(0.4);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 13; ++j) {
      if (keep(gen)) map.set(i, j, depth(gen));
    }
  }
  io::write_raster(map, dir / "m.dvr");
  std::vector<DepthMap> back = io::read_raster(dir / "m.dvr");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].width, 13);
  EXPECT_EQ(back[0].height, 9);
  EXPECT_EQ(back[0].valid, map.valid);
  // Invalid pixels are normalized to depth 0 on write.
  for (std::size_t i = 0; i < map.depth.size(); ++i) {
    if (map.valid[i]) EXPECT_EQ(back[0].depth[i], map.depth[i]);
  }
}

TEST(Raster, RoundTripVariationMap) {
  fs::path dir = temp_dir("raster_var");
  DepthMap aggr(10, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 10; ++j) aggr.set(i, j, static_cast<float>(i + j));
  }
  DepthVariationMap var = depth_gradients(aggr);
  io::write_raster(var, dir / "v.dvr");
  std::vector<DepthMap> back = io::read_raster(dir / "v.dvr");
  ASSERT_EQ(back.size(), 5u);
  for (int c = 0; c < 5; ++c) {
    EXPECT_EQ(back[c].depth, var.channels[c].depth);
    EXPECT_EQ(back[c].valid, var.channels[c].valid);
  }
}

TEST(Raster, HeaderLayoutIsAsDocumented) {
  fs::path dir = temp_dir("raster_hdr");
  DepthMap map(3, 2);
  map.set(0, 0, 1.5f);
  io::write_raster(map, dir / "m.dvr");
  std::string bytes = slurp(dir / "m.dvr");
  // 4 magic + 12 dims + 6*4 floats + 1 mask byte
  ASSERT_EQ(bytes.size(), 4u + 12u + 24u + 1u);
  EXPECT_EQ(bytes.substr(0, 4), "DVR1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);   // width LE
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);   // height LE
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 1);  // channels LE
  EXPECT_EQ(static_cast<unsigned char>(bytes[40]), 0x01);  // LSB-first mask
}

TEST(Raster, TruncationAndBadMagicRejected) {
  fs::path dir = temp_dir("raster_bad");
  DepthMap map(4, 4);
  io::write_raster(map, dir / "m.dvr");
  std::string bytes = slurp(dir / "m.dvr");
  std::ofstream(dir / "cut.dvr", std::ios::binary)
      << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(io::read_raster(dir / "cut.dvr"), ParseError);
  bytes[0] = 'X';
  std::ofstream(dir / "magic.dvr", std::ios::binary) << bytes;
  EXPECT_THROW(io::read_raster(dir / "magic.dvr"), ParseError);
}

// ---------------------------------------------------------------------------
// Digests
// ---------------------------------------------------------------------------

TEST(Digest, KnownSha256Vectors) {
  EXPECT_EQ(io::sha256_hex(std::string("")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(io::sha256_hex(std::string("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, FileDigestMatchesBufferDigest) {
  fs::path dir = temp_dir("digest");
  std::string payload(100000, '\0');
  std::mt19937 gen(9);
  for (char& c : payload) c = static_cast<char>(gen() & 0xFF);
  std::ofstream(dir / "blob", std::ios::binary) << payload;
  EXPECT_EQ(io::sha256_file(dir / "blob"), io::sha256_hex(payload));
}

// ---------------------------------------------------------------------------
// Calibration files
// ---------------------------------------------------------------------------

TEST(Calibration, RoundTripPreservesEverything) {
  fs::path dir = temp_dir("calib_rt");
  io::CalibrationRecord rec;
  rec.sensor_id = "cam0";
  rec.extrinsic_tag = "lidar_to_camera";
  rec.extrinsic.rotation = rotation_from_rpy(RotationRpy(0.01, -0.3, 2.2));
  rec.extrinsic.translation = Eigen::Vector3d(0.1, -0.2, 1.5);
  rec.extrinsic.frame_from = "lidar0";
  rec.extrinsic.frame_to = "cam0";
  rec.intrinsics = CameraModel(1000.5, 999.25, 832.0, 480.0, 1664, 960);
  io::write_calibration(rec, dir / "c.calib");
  io::CalibrationRecord back = io::read_calibration(dir / "c.calib");
  EXPECT_EQ(back.sensor_id, "cam0");
  EXPECT_EQ(back.extrinsic_tag, "lidar_to_camera");
  EXPECT_EQ(back.extrinsic.frame_from, "lidar0");
  EXPECT_EQ(back.extrinsic.frame_to, "cam0");
  // %.17g round-trips doubles exactly.
  EXPECT_EQ(back.extrinsic.rotation, rec.extrinsic.rotation);
  EXPECT_EQ(back.extrinsic.translation, rec.extrinsic.translation);
  ASSERT_TRUE(back.intrinsics.has_value());
  EXPECT_EQ(back.intrinsics->fx, 1000.5);
  EXPECT_EQ(back.intrinsics->height, 960);
}

TEST(Calibration, RpyInputAccepted) {
  fs::path dir = temp_dir("calib_rpy");
  std::ofstream(dir / "c.calib")
      << "sensor_id: lidar0\nrotation_rpy_deg: 0 0 90\n"
         "translation_m: 1 2 3\n";
  io::CalibrationRecord rec = io::read_calibration(dir / "c.calib");
  Eigen::Vector3d mapped = rec.extrinsic.rotation * Eigen::Vector3d::UnitX();
  EXPECT_NEAR(mapped.y(), 1.0, 1e-12);
  EXPECT_FALSE(rec.intrinsics.has_value());
}

TEST(Calibration, MissingFieldNamesTheField) {
  fs::path dir = temp_dir("calib_missing");
  std::ofstream(dir / "c.calib")
      << "sensor_id: lidar0\nrotation_rpy_deg: 0 0 0\n";
  try {
    io::read_calibration(dir / "c.calib");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("translation_m"), std::string::npos);
  }
}

TEST(Calibration, NonOrthonormalRejectedUnlessRepaired) {
  fs::path dir = temp_dir("calib_ortho");
  std::ofstream(dir / "c.calib")
      << "sensor_id: s\nrotation_matrix: 1.001 0 0 0 1 0 0 0 1\n"
         "translation_m: 0 0 0\n";
  EXPECT_THROW(io::read_calibration(dir / "c.calib"), ParseError);
  io::CalibrationRecord rec = io::read_calibration(dir / "c.calib", true);
  EXPECT_TRUE(rec.extrinsic.is_valid(1e-9));
}

TEST(Calibration, ReflectionAlwaysRejected) {
  fs::path dir = temp_dir("calib_reflect");
  std::ofstream(dir / "c.calib")
      << "sensor_id: s\nrotation_matrix: -1 0 0 0 1 0 0 0 1\n"
         "translation_m: 0 0 0\n";
  EXPECT_THROW(io::read_calibration(dir / "c.calib", true), ParseError);
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

namespace {

io::ScenarioManifest build_manifest(const fs::path& root) {
  io::ScenarioManifest m;
  m.scenario_id = "scene_7";
  m.root = root;
  io::AgentRecord agent;
  agent.agent_id = "veh0";
  agent.kind = io::AgentKind::kVehicle;
  io::SensorRecord lidar;
  lidar.sensor_id = "lidar0";
  lidar.kind = io::SensorKind::kLidar;
  lidar.calibration = "lidar0.calib";
  for (int i = 0; i < 3; ++i) {
    io::FrameRecord f;
    f.frame_id = "f" + std::to_string(i);
    f.timestamp_s = 0.1 * i;
    f.file = "cloud" + std::to_string(i) + ".pcd";
    RigidTransform pose;
    pose.translation = Eigen::Vector3d(2.0 * i, 0.0, 0.0);
    f.pose = pose;
    lidar.frames.push_back(std::move(f));
  }
  agent.sensors.push_back(std::move(lidar));
  m.agents.push_back(std::move(agent));
  return m;
}

void materialize_files(const io::ScenarioManifest& m) {
  for (const io::AgentRecord& a : m.agents) {
    for (const io::SensorRecord& s : a.sensors) {
      if (!s.calibration.empty()) {
        io::CalibrationRecord rec;
        rec.sensor_id = s.sensor_id;
        io::write_calibration(rec, m.root / s.calibration);
      }
      for (const io::FrameRecord& f : s.frames) {
        io::write_point_cloud(PointCloud{}, m.root / f.file);
      }
    }
  }
}

}  // namespace

TEST(Manifest, RoundTripPreservesStructure) {
  fs::path dir = temp_dir("manifest_rt");
  io::ScenarioManifest m = build_manifest(dir);
  materialize_files(m);
  io::save_manifest(m, dir / "manifest.json");
  io::ScenarioManifest back = io::load_manifest(dir / "manifest.json");
  EXPECT_EQ(back.scenario_id, "scene_7");
  ASSERT_EQ(back.agents.size(), 1u);
  EXPECT_EQ(back.agents[0].kind, io::AgentKind::kVehicle);
  ASSERT_EQ(back.agents[0].sensors.size(), 1u);
  const io::SensorRecord& lidar = back.agents[0].sensors[0];
  EXPECT_EQ(lidar.kind, io::SensorKind::kLidar);
  ASSERT_EQ(lidar.frames.size(), 3u);
  EXPECT_EQ(lidar.frames[2].file, "cloud2.pcd");
  ASSERT_TRUE(lidar.frames[1].pose.has_value());
  EXPECT_NEAR(lidar.frames[1].pose->translation.x(), 2.0, 1e-12);
}

TEST(Manifest, MissingReferencedFileRejected) {
  fs::path dir = temp_dir("manifest_missing");
  io::ScenarioManifest m = build_manifest(dir);
  materialize_files(m);
  fs::remove(dir / "cloud1.pcd");
  io::save_manifest(m, dir / "manifest.json");
  EXPECT_THROW(io::load_manifest(dir / "manifest.json"), ParseError);
  // Opt-out for consumers that only need the structure.
  EXPECT_NO_THROW(io::load_manifest(dir / "manifest.json", false));
}

TEST(Manifest, NonMonotonicTimestampsRejected) {
  fs::path dir = temp_dir("manifest_ts");
  io::ScenarioManifest m = build_manifest(dir);
  m.agents[0].sensors[0].frames[2].timestamp_s = 0.05;
  materialize_files(m);
  io::save_manifest(m, dir / "manifest.json");
  EXPECT_THROW(io::load_manifest(dir / "manifest.json"), ParseError);
}

TEST(Manifest, MalformedJsonReportsOffset) {
  fs::path dir = temp_dir("manifest_bad");
  std::ofstream(dir / "manifest.json") << "{\"schema_version\": 1, !}";
  try {
    io::load_manifest(dir / "manifest.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.byte_offset(), ParseError::npos);
  }
}

// ---------------------------------------------------------------------------
// Run config
// ---------------------------------------------------------------------------

TEST(RunConfigJson, DefaultRecipeRoundTrips) {
  RunConfig c = default_run_config();
  c.root_seed = 987654321;
  RunConfig back = run_config_from_json(run_config_to_json(c));
  EXPECT_EQ(back.root_seed, 987654321u);
  for (auto a : {io::AgentKind::kVehicle, io::AgentKind::kInfrastructure}) {
    for (auto s : {io::SensorKind::kLidar, io::SensorKind::kCamera}) {
      EXPECT_EQ(back.kinds_for(a, s), c.kinds_for(a, s));
    }
  }
  EXPECT_EQ(back.perspective.alpha, c.perspective.alpha);
  EXPECT_EQ(back.motion.sector_count, c.motion.sector_count);
}

TEST(RunConfigJson, DefaultRecipeMatchesDocumentedMatrix) {
  RunConfig c = default_run_config();
  using io::AgentKind;
  using io::SensorKind;
  EXPECT_TRUE(c.is_enabled(AgentKind::kVehicle, SensorKind::kLidar,
                           "motion_distortion"));
  EXPECT_FALSE(
      c.is_enabled(AgentKind::kVehicle, SensorKind::kLidar, "vibration"));
  EXPECT_TRUE(c.is_enabled(AgentKind::kInfrastructure, SensorKind::kCamera,
                           "perspective_distortion"));
  EXPECT_FALSE(c.is_enabled(AgentKind::kVehicle, SensorKind::kCamera,
                            "perspective_distortion"));
  EXPECT_TRUE(c.is_enabled(AgentKind::kInfrastructure, SensorKind::kLidar,
                           "systematic_error"));
}

TEST(RunConfigJson, UnknownKeysRejectedEverywhere) {
  json j = run_config_to_json(default_run_config());
  j["extra"] = 1;
  EXPECT_THROW(run_config_from_json(j), ParseError);
  j.erase("extra");
  j["vibration"]["typo_key"] = 2;
  EXPECT_THROW(run_config_from_json(j), ParseError);
}

TEST(RunConfigJson, UnknownNoiseKindRejected) {
  json j = run_config_to_json(default_run_config());
  j["noise"]["vehicle"]["lidar"].push_back("gremlins");
  EXPECT_THROW(run_config_from_json(j), ParseError);
}

TEST(RunConfigJson, PerspectiveLevelNamesAccepted) {
  json j = run_config_to_json(RunConfig{});
  j["perspective"] = {{"level", "moderate"}};
  RunConfig c = run_config_from_json(j);
  EXPECT_DOUBLE_EQ(c.perspective.alpha, 0.021);
  j["perspective"] = {{"level", "moderate"}, {"alpha", 0.5}};
  EXPECT_THROW(run_config_from_json(j), ParseError);
}

TEST(RunConfigJson, SchemaVersionRequired) {
  json j = run_config_to_json(RunConfig{});
  j.erase("schema_version");
  EXPECT_THROW(run_config_from_json(j), ParseError);
}

// ---------------------------------------------------------------------------
// Corruption ledger
// ---------------------------------------------------------------------------

TEST(Ledger, RoundTripPreservesEntries) {
  fs::path dir = temp_dir("ledger_rt");
  io::CorruptionLedger ledger;
  ledger.root_seed = 42;
  ledger.tool_version = kToolVersion;
  ledger.config = run_config_to_json(default_run_config());
  io::LedgerEntry e;
  e.scenario = "s";
  e.agent = "veh0";
  e.sensor = "lidar0";
  e.frame = "f0";
  e.noise_kind = "calibration_error";
  e.params = {{"d_roll_deg", 0.123}, {"d_tx_m", -0.2}};
  e.inputs.emplace_back("data/in.pcd", std::string(64, 'a'));
  e.outputs.emplace_back("data/out.pcd", std::string(64, 'b'));
  ledger.entries.push_back(e);
  io::write_ledger(ledger, dir / "ledger.json");
  io::CorruptionLedger back = io::read_ledger(dir / "ledger.json");
  EXPECT_EQ(back.root_seed, 42u);
  EXPECT_EQ(back.tool_version, kToolVersion);
  ASSERT_EQ(back.entries.size(), 1u);
  EXPECT_EQ(back.entries[0].noise_kind, "calibration_error");
  EXPECT_EQ(back.entries[0].params["d_roll_deg"], 0.123);
  EXPECT_EQ(back.entries[0].outputs[0].first, "data/out.pcd");
  // The config snapshot embedded in the ledger is loadable on its own.
  EXPECT_NO_THROW(run_config_from_json(back.config));
}
