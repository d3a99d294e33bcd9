#include "v2xnoise/geometry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace v2xnoise;

namespace {

// Independent oracle: elementary rotation matrices written out longhand and
// multiplied in the yaw * pitch * roll order.
Eigen::Matrix3d rpy_oracle(double roll, double pitch, double yaw) {
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0,
        0, std::cos(roll), -std::sin(roll),
        0, std::sin(roll), std::cos(roll);
  ry << std::cos(pitch), 0, std::sin(pitch),
        0, 1, 0,
        -std::sin(pitch), 0, std::cos(pitch);
  rz << std::cos(yaw), -std::sin(yaw), 0,
        std::sin(yaw), std::cos(yaw), 0,
        0, 0, 1;
  return rz * ry * rx;
}

RigidTransform random_transform(std::mt19937& gen, double max_angle = 1.0,
                                double max_trans = 5.0) {
  std::uniform_real_distribution<double> angle(-max_angle, max_angle);
  std::uniform_real_distribution<double> trans(-max_trans, max_trans);
  RigidTransform t;
  t.rotation = rotation_from_rpy(
      RotationRpy(angle(gen), angle(gen) * 0.45, angle(gen)));
  t.translation = Eigen::Vector3d(trans(gen), trans(gen), trans(gen));
  return t;
}

PointCloud random_cloud(std::mt19937& gen, std::size_t n) {
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.push_back(
        {coord(gen), coord(gen), coord(gen), std::abs(coord(gen))});
  }
  return cloud;
}

}  // namespace

TEST(RotationFromRpy, ZeroAnglesGiveIdentity) {
  Eigen::Matrix3d r = rotation_from_rpy(RotationRpy(0, 0, 0));
  EXPECT_TRUE(r.isApprox(Eigen::Matrix3d::Identity(), 1e-15));
}

TEST(RotationFromRpy, QuarterTurnAboutZ) {
  Eigen::Matrix3d r = rotation_from_rpy(RotationRpy(0, 0, kPi / 2));
  Eigen::Vector3d mapped = r * Eigen::Vector3d::UnitX();
  EXPECT_NEAR(mapped.x(), 0.0, 1e-15);
  EXPECT_NEAR(mapped.y(), 1.0, 1e-15);
  EXPECT_NEAR(mapped.z(), 0.0, 1e-15);
}

TEST(RotationFromRpy, MatchesElementaryMatrixOracle) {
  Eigen::Matrix3d r = rotation_from_rpy(RotationRpy(0.1, -0.2, 0.3));
  Eigen::Matrix3d expected = rpy_oracle(0.1, -0.2, 0.3);
  EXPECT_LT((r - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RotationFromRpy, RejectsNonFinite) {
  EXPECT_THROW(RotationRpy(std::nan(""), 0, 0), std::invalid_argument);
}

TEST(RotationFromRpy, AlwaysOrthonormal) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    RigidTransform t;
    t.rotation =
        rotation_from_rpy(RotationRpy(angle(gen), angle(gen), angle(gen)));
    EXPECT_TRUE(t.is_valid(1e-9));
  }
}

TEST(RpyFromRotation, IdentityGivesZero) {
  RotationRpy rpy = rpy_from_rotation(Eigen::Matrix3d::Identity());
  EXPECT_EQ(rpy.roll, 0.0);
  EXPECT_EQ(rpy.pitch, 0.0);
  EXPECT_EQ(rpy.yaw, 0.0);
}

TEST(RpyFromRotation, RoundTripKnownAngles) {
  RotationRpy rpy =
      rpy_from_rotation(rotation_from_rpy(RotationRpy(0.1, -0.2, 0.3)));
  EXPECT_NEAR(rpy.roll, 0.1, 1e-9);
  EXPECT_NEAR(rpy.pitch, -0.2, 1e-9);
  EXPECT_NEAR(rpy.yaw, 0.3, 1e-9);
}

TEST(RpyFromRotation, RoundTripProperty) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> pitch(-1.4, 1.4);
  for (int i = 0; i < 500; ++i) {
    Eigen::Matrix3d r =
        rotation_from_rpy(RotationRpy(angle(gen), pitch(gen), angle(gen)));
    Eigen::Matrix3d back = rotation_from_rpy(rpy_from_rotation(r));
    EXPECT_LT((r - back).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(RpyFromRotation, GimbalLockRejected) {
  Eigen::Matrix3d r = rotation_from_rpy(RotationRpy(0.2, kPi / 2, 0.1));
  EXPECT_THROW(rpy_from_rotation(r), DegenerateOrientationError);
}

TEST(Compose, IdentityIsNeutral) {
  std::mt19937 gen(3);
  RigidTransform t = random_transform(gen);
  RigidTransform composed = compose(t, RigidTransform{});
  EXPECT_TRUE(composed.rotation.isApprox(t.rotation, 1e-15));
  EXPECT_TRUE(composed.translation.isApprox(t.translation, 1e-15));
}

TEST(Compose, InverseGivesIdentity) {
  std::mt19937 gen(4);
  for (int i = 0; i < 50; ++i) {
    RigidTransform t = random_transform(gen);
    RigidTransform id = compose(t, invert(t));
    EXPECT_LT((id.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(),
              1e-9);
    EXPECT_LT(id.translation.cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Compose, MatchesHomogeneousMatrixOracle) {
  std::mt19937 gen(5);
  for (int i = 0; i < 50; ++i) {
    RigidTransform a = random_transform(gen);
    RigidTransform b = random_transform(gen);
    Eigen::Matrix4d expected = a.matrix() * b.matrix();
    EXPECT_LT((compose(a, b).matrix() - expected).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(Compose, FrameMismatchThrows) {
  RigidTransform a = RigidTransform::identity();
  a.frame_from = "camera";
  RigidTransform b = RigidTransform::identity();
  b.frame_to = "lidar";
  EXPECT_THROW(compose(a, b), FrameError);
}

TEST(Compose, FrameBookkeepingPropagates) {
  RigidTransform a, b;
  a.frame_from = "body";
  a.frame_to = "world";
  b.frame_from = "lidar";
  b.frame_to = "body";
  RigidTransform c = compose(a, b);
  EXPECT_EQ(c.frame_from, "lidar");
  EXPECT_EQ(c.frame_to, "world");
}

TEST(Invert, Identity) {
  RigidTransform inv = invert(RigidTransform{});
  EXPECT_TRUE(inv.rotation.isIdentity(1e-15));
  EXPECT_EQ(inv.translation, Eigen::Vector3d::Zero());
}

TEST(Invert, PureTranslation) {
  RigidTransform t;
  t.translation = Eigen::Vector3d(1, 2, 3);
  RigidTransform inv = invert(t);
  EXPECT_EQ(inv.translation, Eigen::Vector3d(-1, -2, -3));
}

TEST(Invert, SwapsFrames) {
  RigidTransform t;
  t.frame_from = "lidar";
  t.frame_to = "camera";
  RigidTransform inv = invert(t);
  EXPECT_EQ(inv.frame_from, "camera");
  EXPECT_EQ(inv.frame_to, "lidar");
}

TEST(TransformPoints, IdentityLeavesCoordinatesExact) {
  std::mt19937 gen(6);
  PointCloud cloud = random_cloud(gen, 100);
  PointCloud out = transform_points(RigidTransform{}, cloud);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_EQ(out.points[i].x, cloud.points[i].x);
    EXPECT_EQ(out.points[i].y, cloud.points[i].y);
    EXPECT_EQ(out.points[i].z, cloud.points[i].z);
  }
}

TEST(TransformPoints, PureTranslation) {
  PointCloud cloud;
  cloud.points.push_back({1, 1, 1, 0.5});
  RigidTransform t;
  t.translation = Eigen::Vector3d(0, 0, 5);
  PointCloud out = transform_points(t, cloud);
  EXPECT_EQ(out.points[0].x, 1.0);
  EXPECT_EQ(out.points[0].y, 1.0);
  EXPECT_EQ(out.points[0].z, 6.0);
  EXPECT_EQ(out.points[0].intensity, 0.5);
}

TEST(TransformPoints, MatchesHomogeneousOracle) {
  std::mt19937 gen(8);
  RigidTransform t = random_transform(gen);
  PointCloud cloud = random_cloud(gen, 200);
  PointCloud out = transform_points(t, cloud);
  Eigen::Matrix4d m = t.matrix();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Eigen::Vector4d h(cloud.points[i].x, cloud.points[i].y, cloud.points[i].z,
                      1.0);
    Eigen::Vector4d expected = m * h;
    EXPECT_NEAR(out.points[i].x, expected.x(), 1e-12);
    EXPECT_NEAR(out.points[i].y, expected.y(), 1e-12);
    EXPECT_NEAR(out.points[i].z, expected.z(), 1e-12);
  }
}

TEST(TransformPoints, PreservesPairwiseDistances) {
  std::mt19937 gen(9);
  RigidTransform t = random_transform(gen);
  PointCloud cloud = random_cloud(gen, 50);
  PointCloud out = transform_points(t, cloud);
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    auto dist = [](const Point& a, const Point& b) {
      return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
    };
    EXPECT_NEAR(dist(cloud.points[i], cloud.points[i - 1]),
                dist(out.points[i], out.points[i - 1]), 1e-9);
  }
}

TEST(TransformPoints, FrameMismatchThrows) {
  PointCloud cloud;
  cloud.frame = "lidar0";
  RigidTransform t;
  t.frame_from = "lidar1";
  EXPECT_THROW(transform_points(t, cloud), FrameError);
}

TEST(ProjectPoints, OpticalAxisPoint) {
  CameraModel cam(1000, 1000, 832, 480, 1664, 960);
  PointCloud cloud;
  cloud.points.push_back({0, 0, 10, 1.0});
  ProjectionResult r = project_points(cam, RigidTransform{}, cloud);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_DOUBLE_EQ(r.points[0].u, 832.0);
  EXPECT_DOUBLE_EQ(r.points[0].v, 480.0);
  EXPECT_DOUBLE_EQ(r.points[0].depth, 10.0);
}

TEST(ProjectPoints, ZeroDepthDropped) {
  CameraModel cam(1000, 1000, 832, 480, 1664, 960);
  PointCloud cloud;
  cloud.points.push_back({0, 0, 0, 1.0});
  cloud.points.push_back({0, 0, -5, 1.0});
  ProjectionResult r = project_points(cam, RigidTransform{}, cloud);
  EXPECT_TRUE(r.points.empty());
  EXPECT_EQ(r.dropped, 2u);
}

TEST(ProjectPoints, MatchesScalarPinholeOracle) {
  CameraModel cam(1200, 1100, 800, 450, 1664, 960);
  std::mt19937 gen(10);
  std::uniform_real_distribution<double> depth(1.0, 50.0);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  PointCloud cloud;
  for (int i = 0; i < 100; ++i) {
    // Construct a point that lands at a chosen pixel.
    double z = depth(gen);
    double u = unit(gen) * cam.width;
    double v = unit(gen) * cam.height;
    cloud.points.push_back({(u - cam.cx) * z / cam.fx,
                            (v - cam.cy) * z / cam.fy, z, 1.0});
  }
  ProjectionResult r = project_points(cam, RigidTransform{}, cloud);
  ASSERT_EQ(r.points.size(), cloud.size());
  for (const ProjectedPoint& p : r.points) {
    const Point& src = cloud.points[p.point_index];
    EXPECT_NEAR(p.u, cam.fx * src.x / src.z + cam.cx, 1e-9);
    EXPECT_NEAR(p.v, cam.fy * src.y / src.z + cam.cy, 1e-9);
  }
}

TEST(ProjectPoints, BackProjectionRecoversSource) {
  CameraModel cam(1000, 1000, 832, 480, 1664, 960);
  std::mt19937 gen(12);
  RigidTransform t = random_transform(gen, 0.3, 1.0);
  std::uniform_real_distribution<double> depth(2.0, 60.0);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  PointCloud cloud;
  RigidTransform t_inv = invert(t);
  for (int i = 0; i < 1000; ++i) {
    double z = depth(gen);
    double u = unit(gen) * cam.width;
    double v = unit(gen) * cam.height;
    Eigen::Vector3d cam_pt((u - cam.cx) * z / cam.fx,
                           (v - cam.cy) * z / cam.fy, z);
    Eigen::Vector3d lidar_pt = t_inv.apply(cam_pt);
    cloud.points.push_back({lidar_pt.x(), lidar_pt.y(), lidar_pt.z(), 1.0});
  }
  ProjectionResult r = project_points(cam, t, cloud);
  ASSERT_EQ(r.points.size(), cloud.size());
  for (const ProjectedPoint& p : r.points) {
    Eigen::Vector3d cam_pt((p.u - cam.cx) * p.depth / cam.fx,
                           (p.v - cam.cy) * p.depth / cam.fy, p.depth);
    Eigen::Vector3d back = t_inv.apply(cam_pt);
    const Point& src = cloud.points[p.point_index];
    EXPECT_NEAR(back.x(), src.x, 1e-6);
    EXPECT_NEAR(back.y(), src.y, 1e-6);
    EXPECT_NEAR(back.z(), src.z, 1e-6);
  }
}

TEST(FractionalTransform, PureTranslationIsLinear) {
  RigidTransform t;
  t.translation = Eigen::Vector3d(1, 0, 0);
  RigidTransform f = fractional_transform(t, 0.37);
  EXPECT_NEAR(f.translation.x(), 0.37, 1e-12);
  EXPECT_NEAR(f.translation.y(), 0.0, 1e-12);
  EXPECT_TRUE(f.rotation.isIdentity(1e-12));
}

TEST(FractionalTransform, EndpointsExact) {
  std::mt19937 gen(13);
  for (int i = 0; i < 20; ++i) {
    RigidTransform t = random_transform(gen);
    RigidTransform zero = fractional_transform(t, 0.0);
    EXPECT_TRUE(zero.rotation.isIdentity(1e-12));
    EXPECT_LT(zero.translation.cwiseAbs().maxCoeff(), 1e-12);
    RigidTransform one = fractional_transform(t, 1.0);
    EXPECT_LT((one.rotation - t.rotation).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((one.translation - t.translation).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FractionalTransform, HundredStepsRecomposeFullMotion) {
  std::mt19937 gen(14);
  for (int trial = 0; trial < 20; ++trial) {
    RigidTransform t = random_transform(gen, 0.2, 2.0);
    RigidTransform step = fractional_transform(t, 0.01);
    RigidTransform acc;
    for (int i = 0; i < 100; ++i) acc = compose(step, acc);
    EXPECT_LT((acc.matrix() - t.matrix()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(FractionalTransform, GroupProperty) {
  std::mt19937 gen(15);
  std::uniform_real_distribution<double> frac(0.0, 0.5);
  for (int i = 0; i < 50; ++i) {
    RigidTransform t = random_transform(gen, 0.5, 2.0);
    double a = frac(gen), b = frac(gen);
    RigidTransform lhs =
        compose(fractional_transform(t, a), fractional_transform(t, b));
    RigidTransform rhs = fractional_transform(t, a + b);
    EXPECT_LT((lhs.matrix() - rhs.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(FractionalTransform, PiRotationRejected) {
  RigidTransform t;
  t.rotation = rotation_from_rpy(RotationRpy(0, 0, kPi));
  EXPECT_THROW(fractional_transform(t, 0.5), DegenerateOrientationError);
}
