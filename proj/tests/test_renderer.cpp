#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "vista/renderer.hpp"

namespace vista {
namespace {

CameraView axis_camera(int w, int h, double f, double c) {
  CameraView cam;
  cam.fx = cam.fy = f;
  cam.cx = cam.cy = c;
  cam.width = w;
  cam.height = h;
  return cam;
}

GaussianCloud solid_splat(const Eigen::Vector3d& mean, double log_scale, double logit_alpha, const Rgb& rgb) {
  GaussianCloud cloud;
  cloud.sh_degree = 0;
  cloud.add_splat(mean, Eigen::Vector3d::Constant(log_scale), {1, 0, 0, 0}, logit_alpha, rgb);
  return cloud;
}

TEST(ProjectSplat, IsotropicOnAxisCovariance) {
  const auto cloud = solid_splat({0, 0, 1}, std::log(0.01), 0.0, {0.5, 0.5, 0.5});
  const auto p = project_splat(cloud, 0, axis_camera(100, 100, 100.0, 50.0));
  ASSERT_TRUE(p.has_value());
  // (fx * s / z)^2 = 1, plus the 0.3 floor.
  EXPECT_NEAR(p->cov2d(0, 0), 1.3, 1e-9);
  EXPECT_NEAR(p->cov2d(1, 1), 1.3, 1e-9);
  EXPECT_NEAR(p->cov2d(0, 1), 0.0, 1e-12);
}

TEST(ProjectSplat, BehindCameraIsCulled) {
  const auto cloud = solid_splat({0, 0, -1}, std::log(0.01), 0.0, {0.5, 0.5, 0.5});
  EXPECT_FALSE(project_splat(cloud, 0, axis_camera(100, 100, 100.0, 50.0)).has_value());
  const auto near = solid_splat({0, 0, 0.005}, std::log(0.01), 0.0, {0.5, 0.5, 0.5});
  EXPECT_FALSE(project_splat(near, 0, axis_camera(100, 100, 100.0, 50.0)).has_value());
}

TEST(ProjectSplat, OnAxisMeanAtPrincipalPoint) {
  const auto cloud = solid_splat({0, 0, 2}, std::log(0.01), 0.0, {0.5, 0.5, 0.5});
  const auto p = project_splat(cloud, 0, axis_camera(100, 100, 100.0, 50.0));
  ASSERT_TRUE(p.has_value());
  EXPECT_DOUBLE_EQ(p->mean2d.x(), 50.0);
  EXPECT_DOUBLE_EQ(p->mean2d.y(), 50.0);
  EXPECT_DOUBLE_EQ(p->depth, 2.0);
}

TEST(ProjectSplat, EllipseOutsideFrameIsCulled) {
  // Mean projects 40 px left of the frame; radius is a few pixels.
  const auto cloud = solid_splat({-0.9, 0, 1}, std::log(0.01), 0.0, {0.5, 0.5, 0.5});
  EXPECT_FALSE(project_splat(cloud, 0, axis_camera(100, 100, 100.0, 50.0)).has_value());
  // Same offset but wide enough that the 99% ellipse reaches the first column.
  const auto wide = solid_splat({-0.9, 0, 1}, std::log(0.25), 0.0, {0.5, 0.5, 0.5});
  EXPECT_TRUE(project_splat(wide, 0, axis_camera(100, 100, 100.0, 50.0)).has_value());
}

TEST(Render, EmptyCloudIsBackground) {
  GaussianCloud cloud;
  const auto out = render(cloud, axis_camera(8, 8, 10, 3.5), Rgb::Zero());
  for (double v : out.color.data) EXPECT_EQ(v, 0.0);
  for (double v : out.alpha.data) EXPECT_EQ(v, 0.0);
  const auto grey = render(cloud, axis_camera(8, 8, 10, 3.5), Rgb(0.2, 0.4, 0.6));
  EXPECT_DOUBLE_EQ(grey.color.at(5, 5, 1), 0.4);
}

TEST(Render, SingleOpaqueSplat) {
  const auto cloud = solid_splat({0, 0, 3}, std::log(0.2), 40.0, {1, 0, 0});
  const auto out = render(cloud, axis_camera(8, 8, 10, 3.0), Rgb::Zero());
  EXPECT_NEAR(out.color.at(3, 3, 0), 1.0, 1e-12);
  EXPECT_NEAR(out.color.at(3, 3, 1), 0.0, 1e-12);
  EXPECT_NEAR(out.depth.at(3, 3), 3.0, 1e-12);
  EXPECT_NEAR(out.alpha.at(3, 3), 1.0, 1e-12);
}

TEST(Render, TwoSplatComposite) {
  GaussianCloud cloud;
  cloud.sh_degree = 0;
  cloud.add_splat({0, 0, 1}, Eigen::Vector3d::Constant(std::log(0.05)), {1, 0, 0, 0}, 0.0, {1, 0, 0});
  cloud.add_splat({0, 0, 2}, Eigen::Vector3d::Constant(std::log(0.1)), {1, 0, 0, 0}, 40.0, {0, 0, 1});
  for (const auto& out : {render(cloud, axis_camera(8, 8, 10, 3.0)), render_naive(cloud, axis_camera(8, 8, 10, 3.0))}) {
    EXPECT_NEAR(out.color.at(3, 3, 0), 0.5, 1e-12);
    EXPECT_NEAR(out.color.at(3, 3, 1), 0.0, 1e-12);
    EXPECT_NEAR(out.color.at(3, 3, 2), 0.5, 1e-12);
    EXPECT_NEAR(out.depth.at(3, 3), 1.5, 1e-12);
    EXPECT_NEAR(out.alpha.at(3, 3), 1.0, 1e-12);
  }
}

TEST(Render, AgreesWithNaiveOnRandomClouds) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> count(1, 200);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto cam = testing::random_camera(rng, 32, 32, 30.0);
    const auto cloud = testing::random_cloud(rng, count(rng), 1, 1.0, -4.0, -1.0);
    const Rgb bg(0.1, 0.2, 0.3);
    const auto a = render(cloud, cam, bg), b = render_naive(cloud, cam, bg);
    worst = std::max({worst, testing::max_abs_diff(a.color.data, b.color.data),
                      testing::max_abs_diff(a.alpha.data, b.alpha.data)});
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Render, Deterministic) {
  std::mt19937_64 rng(11);
  const auto cam = testing::random_camera(rng, 32, 32, 30.0);
  const auto cloud = testing::random_cloud(rng, 120, 2, 1.0, -4.0, -1.5);
  EXPECT_EQ(render(cloud, cam).color.data, render(cloud, cam).color.data);
}

TEST(Render, AlphaMonotoneInOpacity) {
  std::mt19937_64 rng(5);
  const auto cam = testing::random_camera(rng, 24, 24, 24.0);
  auto cloud = testing::random_cloud(rng, 40, 1, 1.0, -3.5, -1.5);
  const auto before = render(cloud, cam).alpha;
  cloud.opacity_logits[17] += 1.0;
  const auto after = render(cloud, cam).alpha;
  for (std::size_t k = 0; k < before.data.size(); ++k) EXPECT_GE(after.data[k], before.data[k] - 1e-15);
}

TEST(Render, DepthFiniteWhereCovered) {
  std::mt19937_64 rng(9);
  const auto cam = testing::random_camera(rng, 24, 24, 24.0);
  const auto cloud = testing::random_cloud(rng, 60, 1, 1.0, -3.0, -1.5);
  const auto out = render(cloud, cam);
  for (std::size_t k = 0; k < out.alpha.data.size(); ++k) {
    EXPECT_GE(out.alpha.data[k], 0.0);
    EXPECT_LE(out.alpha.data[k], 1.0);
    EXPECT_TRUE(std::isfinite(out.depth.data[k]));
  }
  EXPECT_TRUE(all_finite_in_unit_range(out.color));
}

}  // namespace
}  // namespace vista
