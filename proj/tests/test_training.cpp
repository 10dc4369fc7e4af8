#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "grad_oracle.hpp"
#include "test_util.hpp"
#include "vista/backward.hpp"
#include "vista/error.hpp"
#include "vista/loss.hpp"
#include "vista/optimizer.hpp"
#include "vista/scene_io.hpp"
#include "vista/ssim.hpp"
#include "vista/testgen.hpp"
#include "vista/trainer.hpp"

namespace vista {
namespace {

/// Direct per-pixel evaluation of the weighted SSIM definition.
double brute_ssim(const ImageBuffer& x, const ImageBuffer& y, const GrayMap& w) {
  const int r = kSsimWindow / 2;
  double num = 0.0, den = 0.0;
  for (int py = 0; py < x.height; ++py) {
    for (int px = 0; px < x.width; ++px) {
      for (int c = 0; c < 3; ++c) {
        double ws = 0, mx = 0, my = 0;
        for (int qy = std::max(0, py - r); qy <= std::min(x.height - 1, py + r); ++qy) {
          for (int qx = std::max(0, px - r); qx <= std::min(x.width - 1, px + r); ++qx) {
            const double g = std::exp(-((qx - px) * (qx - px) + (qy - py) * (qy - py)) /
                                      (2 * kSsimSigma * kSsimSigma)) * w.at(qx, qy);
            ws += g;
            mx += g * x.at(qx, qy, c);
            my += g * y.at(qx, qy, c);
          }
        }
        if (ws <= 0.0) continue;
        mx /= ws;
        my /= ws;
        double vx = 0, vy = 0, cxy = 0;
        for (int qy = std::max(0, py - r); qy <= std::min(x.height - 1, py + r); ++qy) {
          for (int qx = std::max(0, px - r); qx <= std::min(x.width - 1, px + r); ++qx) {
            const double g = std::exp(-((qx - px) * (qx - px) + (qy - py) * (qy - py)) /
                                      (2 * kSsimSigma * kSsimSigma)) * w.at(qx, qy) / ws;
            vx += g * (x.at(qx, qy, c) - mx) * (x.at(qx, qy, c) - mx);
            vy += g * (y.at(qx, qy, c) - my) * (y.at(qx, qy, c) - my);
            cxy += g * (x.at(qx, qy, c) - mx) * (y.at(qx, qy, c) - my);
          }
        }
        const double s = ((2 * mx * my + kSsimC1) * (2 * cxy + kSsimC2)) /
                         ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
        num += w.at(px, py) * s;
        den += w.at(px, py);
      }
    }
  }
  return num / den;
}

TEST(Ssim, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  const auto x = testing::random_image(rng, 19, 14), y = testing::random_image(rng, 19, 14);
  GrayMap w(19, 14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w.data) v = u(rng) < 0.2 ? 0.0 : u(rng);
  EXPECT_NEAR(ssim_weighted(x, y, w), brute_ssim(x, y, w), 1e-12);
  EXPECT_NEAR(ssim_weighted(x, y, GrayMap(19, 14, 1.0)), brute_ssim(x, y, GrayMap(19, 14, 1.0)), 1e-12);
}

TEST(Ssim, ConstantImagesClosedForm) {
  const double a = 0.3, b = 0.7;
  const auto x = ImageBuffer::filled(12, 12, Rgb::Constant(a));
  const auto y = ImageBuffer::filled(12, 12, Rgb::Constant(b));
  EXPECT_NEAR(ssim_weighted(x, y, GrayMap(12, 12, 1.0)), (2 * a * b + kSsimC1) / (a * a + b * b + kSsimC1),
              1e-12);
  EXPECT_NEAR(ssim_weighted(x, x, GrayMap(12, 12, 1.0)), 1.0, 1e-15);
}

TEST(Ssim, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  auto x = testing::random_image(rng, 9, 7);
  const auto y = testing::random_image(rng, 9, 7);
  GrayMap w(9, 7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w.data) v = u(rng);
  ImageBuffer grad(9, 7);
  ssim_weighted(x, y, w, &grad);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double saved = x.data[i];
    x.data[i] = saved + 1e-5;
    const double p = ssim_weighted(x, y, w);
    x.data[i] = saved - 1e-5;
    const double m = ssim_weighted(x, y, w);
    x.data[i] = saved;
    EXPECT_NEAR(grad.data[i], (p - m) / 2e-5, 1e-7) << i;
  }
}

TEST(Ssim, AllZeroWeightsRejected) {
  const ImageBuffer x(4, 4);
  EXPECT_THROW(ssim_weighted(x, x, GrayMap(4, 4, 0.0)), VistaError);
}

TEST(Loss, IdenticalImagesGiveZero) {
  std::mt19937_64 rng(1);
  const auto x = testing::random_image(rng, 10, 10);
  GrayMap w(10, 10, 0.5);
  w.at(2, 2) = 0.0;
  EXPECT_NEAR(loss_weighted(x, x, w), 0.0, 1e-15);
}

TEST(Loss, UnitWeightsReduceToPlainObjective) {
  std::mt19937_64 rng(2);
  const auto a = testing::random_image(rng, 16, 12), b = testing::random_image(rng, 16, 12);
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) l1 += std::abs(a.data[i] - b.data[i]);
  l1 /= static_cast<double>(a.data.size());
  const GrayMap ones(16, 12, 1.0);
  const double dssim = (1.0 - brute_ssim(b, a, ones)) / 2.0;
  EXPECT_NEAR(loss_weighted(a, b, ones), 0.8 * l1 + 0.2 * dssim, 1e-12);
  EXPECT_NEAR(loss_weighted(a, b, ones, {1.0, 0.0}), l1, 1e-12);
}

TEST(Loss, RestrictionToRightHalf) {
  std::mt19937_64 rng(5);
  const auto a = testing::random_image(rng, 16, 16), b = testing::random_image(rng, 16, 16);
  GrayMap w(16, 16, 1.0);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 8; ++x) w.at(x, y) = 0.0;
  const double half = loss_weighted(crop(a, 8, 0, 8, 16), crop(b, 8, 0, 8, 16), GrayMap(8, 16, 1.0));
  EXPECT_NEAR(loss_weighted(a, b, w), half, 1e-12);
}

TEST(Loss, ZeroWeightPixelsIgnored) {
  std::mt19937_64 rng(6);
  auto a = testing::random_image(rng, 12, 12);
  const auto b = testing::random_image(rng, 12, 12);
  GrayMap w(12, 12, 1.0);
  for (int k = 0; k < 30; ++k) w.data[k * 4] = 0.0;
  ImageBuffer g1(12, 12), g2(12, 12);
  const double l1 = loss_weighted(a, b, w, {}, &g1);
  for (int k = 0; k < 30; ++k) a.data[k * 12 + 1] = 0.123;
  const double l2 = loss_weighted(a, b, w, {}, &g2);
  EXPECT_DOUBLE_EQ(l1, l2);
  EXPECT_EQ(g1.data, g2.data);
}

TEST(Loss, Errors) {
  const ImageBuffer a(4, 4), b(5, 4);
  EXPECT_THROW(loss_weighted(a, b, GrayMap(4, 4, 1.0)), VistaError);
  EXPECT_THROW(loss_weighted(a, a, GrayMap(4, 4, 0.0)), VistaError);
  EXPECT_THROW(validate(LossWeights{0.7, 0.2}), VistaError);
  EXPECT_THROW(validate(LossWeights{1.2, -0.2}), VistaError);
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(99);
  testing::GradCheck check;
  for (int i = 0; i < 10; ++i) testing::check_scene_gradients(testing::make_grad_scene(rng), 1e-4, 0.0, check);
  EXPECT_LE(check.max_rel, 1e-3) << check.worst;
}

TEST(Backward, SingleSplatAllPartials) {
  std::mt19937_64 rng(100);
  for (int i = 0; i < 4; ++i) {
    auto scene = testing::make_grad_scene(rng);
    scene.cloud.resize(1, scene.cloud.sh_degree);
    testing::GradCheck check;
    testing::check_scene_gradients(scene, 1e-4, 0.0, check);
    EXPECT_EQ(check.partials, 11 + static_cast<long>(scene.cloud.sh_stride()));
    EXPECT_LE(check.max_rel, 1e-3) << check.worst;
  }
}

TEST(Backward, ZeroAtExactFit) {
  std::mt19937_64 rng(12);
  const auto cam = testing::random_camera(rng, 8, 8, 8.0);
  const auto cloud = testing::random_cloud(rng, 6, 1, 0.4, -2.3, -1.2);
  const auto target = render(cloud, cam).color;
  const auto res = backward(cloud, cam, target, GrayMap(8, 8, 1.0));
  double norm = 0.0;
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    norm += res.grads.means[j].squaredNorm() + res.grads.log_scales[j].squaredNorm() +
            res.grads.rotations[j].squaredNorm() + res.grads.opacity_logits[j] * res.grads.opacity_logits[j];
  }
  for (double g : res.grads.sh) norm += g * g;
  EXPECT_LE(std::sqrt(norm), 1e-8);
  EXPECT_NEAR(res.loss, 0.0, 1e-12);
}

TEST(Backward, MaskedOutSplatHasZeroGradient) {
  CameraView cam;
  cam.fx = cam.fy = 20.0;
  cam.cx = cam.cy = 15.5;
  cam.width = cam.height = 32;
  GaussianCloud cloud;
  cloud.sh_degree = 1;
  // Splat 0 near the top-left corner, splat 1 near the bottom-right.
  cloud.add_splat({-0.6, -0.6, 1.0}, Eigen::Vector3d::Constant(std::log(0.01)), {1, 0, 0, 0}, 0.5, {0.9, 0.1, 0.1});
  cloud.add_splat({0.5, 0.5, 1.0}, Eigen::Vector3d::Constant(std::log(0.02)), {1, 0, 0, 0}, 0.5, {0.1, 0.9, 0.1});
  GrayMap w(32, 32, 1.0);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) w.at(x, y) = 0.0;
  const auto target = ImageBuffer::filled(32, 32, Rgb(0.5, 0.5, 0.5));
  const auto res = backward(cloud, cam, target, w);
  EXPECT_TRUE(res.grads.means[0].isZero(0.0));
  EXPECT_TRUE(res.grads.log_scales[0].isZero(0.0));
  EXPECT_EQ(res.grads.opacity_logits[0], 0.0);
  EXPECT_FALSE(res.grads.means[1].isZero(0.0));
}

TEST(Backward, CulledSplatHasZeroGradient) {
  std::mt19937_64 rng(13);
  const auto cam = testing::random_camera(rng, 8, 8, 8.0);
  auto cloud = testing::random_cloud(rng, 3, 0, 0.3, -2.0, -1.5);
  cloud.means[2] = cam.center() + 0.001 * (Eigen::Vector3d::Zero() - cam.center()).normalized();
  const auto res = backward(cloud, cam, testing::random_image(rng, 8, 8), GrayMap(8, 8, 1.0));
  EXPECT_FALSE(res.grads.visible[2]);
  EXPECT_TRUE(res.grads.means[2].isZero(0.0));
  EXPECT_EQ(res.grads.opacity_logits[2], 0.0);
}

TEST(Adam, ZeroGradientKeepsParametersAndDecaysMoments) {
  std::mt19937_64 rng(1);
  auto cloud = testing::random_cloud(rng, 2, 1, 1.0, -3, -2);
  AdamState state;
  state.reset(cloud);
  state.m.means[0] = {1, 2, 3};
  state.v.means[0] = {4, 5, 6};
  SplatArrays grads;
  grads.resize(2, 1);
  grads.set_zero();
  const auto before = cloud;
  adam_step(cloud, grads, state, {});
  EXPECT_EQ(cloud.means, before.means);
  EXPECT_EQ(cloud.sh, before.sh);
  EXPECT_NEAR(state.m.means[0][1], 0.9 * 2, 1e-15);
  EXPECT_NEAR(state.v.means[0][2], 0.999 * 6, 1e-15);
}

TEST(Adam, FirstStepArithmetic) {
  GaussianCloud cloud;
  cloud.sh_degree = 0;
  cloud.add_splat({1, 2, 3}, {-1, -1, -1}, {1, 0, 0, 0}, 0.0, {0.5, 0.5, 0.5});
  AdamState state;
  state.reset(cloud);
  SplatArrays grads;
  grads.resize(1, 0);
  grads.set_zero();
  grads.means[0] = {0.5, -2.0, 0.0};
  grads.opacity_logits[0] = 3e-3;
  LearningRates lr;
  adam_step(cloud, grads, state, lr);
  // Bias-corrected first step: m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
  EXPECT_NEAR(cloud.means[0][0], 1.0 - lr.means * 0.5 / (0.5 + kAdamEps), 1e-15);
  EXPECT_NEAR(cloud.means[0][1], 2.0 + lr.means, 1e-15);
  EXPECT_DOUBLE_EQ(cloud.means[0][2], 3.0);
  EXPECT_NEAR(cloud.opacity_logits[0], -lr.opacity * 3e-3 / (3e-3 + kAdamEps), 1e-16);
  // Second step with the same gradient.
  adam_step(cloud, grads, state, lr);
  const double m = 0.9 * 0.1 * 0.5 + 0.1 * 0.5, v = 0.999 * 0.001 * 0.25 + 0.001 * 0.25;
  const double step = lr.means * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + kAdamEps);
  EXPECT_NEAR(cloud.means[0][0], 1.0 - lr.means - step, 1e-14);
}

TEST(Adam, QuaternionStaysUnit) {
  std::mt19937_64 rng(8);
  auto cloud = testing::random_cloud(rng, 5, 1, 1.0, -3, -2);
  AdamState state;
  state.reset(cloud);
  SplatArrays grads;
  grads.resize(5, 1);
  grads.set_zero();
  std::normal_distribution<double> n(0.0, 10.0);
  for (int it = 0; it < 20; ++it) {
    for (auto& q : grads.rotations) q = {n(rng), n(rng), n(rng), n(rng)};
    adam_step(cloud, grads, state, LearningRates{.rotation = 0.3});
    for (const auto& q : cloud.rotations) EXPECT_NEAR(q.norm(), 1.0, 1e-6);
  }
}

struct DensifyFixture {
  GaussianCloud cloud;
  AdamState state;
  DensifyStats stats;
  DensifyConfig config;

  DensifyFixture() {
    cloud.sh_degree = 1;
    cloud.add_splat({0, 0, 0}, Eigen::Vector3d::Constant(std::log(0.005)), {1, 0, 0, 0}, 0.0, {0.5, 0.5, 0.5});
    cloud.add_splat({1, 0, 0}, {std::log(0.2), std::log(0.05), std::log(0.1)},
                    Eigen::Vector4d(0.9, 0.1, 0.3, -0.2).normalized(), 1.0, {0.2, 0.4, 0.6});
    cloud.add_splat({0, 1, 0}, Eigen::Vector3d::Constant(std::log(0.1)), {1, 0, 0, 0}, 2.0, {0.5, 0.5, 0.5});
    state.reset(cloud);
    for (std::size_t j = 0; j < 3; ++j) state.m.means[j] = Eigen::Vector3d::Constant(j + 1.0);
    stats.reset(3);
    config.scene_extent = 1.0;
    config.seed = 42;
  }
};

TEST(Densify, NothingOverThresholdLeavesCloud) {
  DensifyFixture f;
  f.stats.grad_sum = {1e-5, 1e-5, 0.0};
  f.stats.count = {1, 1, 0};
  const auto before = f.cloud;
  const auto rep = densify_prune(f.cloud, f.stats, f.state, f.config);
  EXPECT_EQ(rep.cloned + rep.split + rep.pruned, 0u);
  EXPECT_EQ(f.cloud.means, before.means);
  EXPECT_EQ(f.cloud.sh, before.sh);
}

TEST(Densify, PrunesTransparentSplat) {
  DensifyFixture f;
  f.cloud.opacity_logits[2] = logit(0.001);
  const auto rep = densify_prune(f.cloud, f.stats, f.state, f.config);
  EXPECT_EQ(rep.pruned, 1u);
  ASSERT_EQ(f.cloud.size(), 2u);
  EXPECT_EQ(f.state.m.means.size(), 2u);
  EXPECT_EQ(f.state.m.means[1], Eigen::Vector3d::Constant(2.0));
}

TEST(Densify, CloneAndSplitRules) {
  DensifyFixture f;
  f.stats.grad_sum = {6e-4, 1e-3, 1e-5};
  f.stats.count = {2, 2, 2};
  const auto parent = f.cloud;
  const auto rep = densify_prune(f.cloud, f.stats, f.state, f.config);
  EXPECT_EQ(rep.cloned, 1u);
  EXPECT_EQ(rep.split, 1u);
  // Survivors 0 and 2, then the clone of 0, then two children of 1.
  ASSERT_EQ(f.cloud.size(), 5u);
  EXPECT_EQ(f.cloud.means[0], parent.means[0]);
  EXPECT_EQ(f.cloud.means[1], parent.means[2]);
  EXPECT_EQ(f.cloud.means[2], parent.means[0]);
  const Eigen::Matrix3d r = parent.rotation_matrix(1);
  const Eigen::Vector3d s = parent.log_scales[1].array().exp();
  for (int c = 3; c < 5; ++c) {
    EXPECT_TRUE(f.cloud.log_scales[c].isApprox((parent.log_scales[1].array() - std::log(1.6)).matrix(), 1e-15));
    const Eigen::Vector3d local = (r.transpose() * (f.cloud.means[c] - parent.means[1])).cwiseQuotient(s);
    EXPECT_LE(local.cwiseAbs().maxCoeff(), 3.0);
    EXPECT_EQ(f.cloud.opacity_logits[c], parent.opacity_logits[1]);
    EXPECT_TRUE(f.state.m.means[c].isZero(0.0));
  }
  EXPECT_EQ(f.state.m.means[0], Eigen::Vector3d::Constant(1.0));
  EXPECT_EQ(f.state.m.means[1], Eigen::Vector3d::Constant(3.0));
  EXPECT_TRUE(f.state.m.means[2].isZero(0.0));
  EXPECT_EQ(f.stats.grad_sum.size(), 5u);

  DensifyFixture g;
  g.stats.grad_sum = f.stats.grad_sum = {6e-4, 1e-3, 1e-5};
  g.stats.count = {2, 2, 2};
  densify_prune(g.cloud, g.stats, g.state, g.config);
  EXPECT_EQ(g.cloud.means, f.cloud.means);
}

TEST(Trainer, RejectsBadConfig) {
  TrainConfig c;
  c.iterations = 0;
  EXPECT_THROW(validate(c), VistaError);
  c.iterations = 10;
  c.densify.prune_opacity = 0.0;
  EXPECT_THROW(validate(c), VistaError);
}

TEST(Trainer, SceneExtent) {
  std::vector<CameraView> cams;
  for (int i = 0; i < 4; ++i) {
    const double a = i * 1.5707963267948966;
    cams.push_back(look_at_camera(i, {2 * std::cos(a), 2 * std::sin(a), 1}, {0, 0, 0}, {0, 0, 1}, 10, 8, 8));
  }
  EXPECT_NEAR(scene_extent(cams), 2.2, 1e-12);
}

TEST(Trainer, SmoothedLossDecreasesOnSmallScene) {
  auto fx = generate_fixture(FixtureKind::kPlane24, 3, FixtureOptions{.width = 32, .height = 32, .focal = 35.0, .points = 600});
  std::vector<TrainView> views;
  for (const auto& v : fx.dataset.views) views.push_back({v.camera, v.image, GrayMap(32, 32, 1.0)});
  TrainConfig cfg;
  cfg.iterations = 600;
  cfg.densify_from = 100;
  cfg.densify_until = 400;
  const auto res = train(init_cloud(fx.dataset.points, {}), views, cfg);
  ASSERT_EQ(res.loss_log.size(), 600u);
  std::vector<double> windows;
  for (int w = 0; w < 6; ++w) {
    windows.push_back(std::accumulate(res.loss_log.begin() + 100 * w, res.loss_log.begin() + 100 * (w + 1), 0.0) / 100);
  }
  for (int w = 1; w < 6; ++w) EXPECT_LE(windows[w], windows[w - 1]) << w;
  EXPECT_LT(windows.back(), 0.5 * windows.front());
}

TEST(Trainer, AllZeroWeightViewsAreSkipped) {
  std::mt19937_64 rng(1);
  const auto cam = testing::random_camera(rng, 8, 8, 8.0);
  const auto cloud = testing::random_cloud(rng, 4, 0, 0.3, -2, -1.5);
  TrainConfig cfg;
  cfg.iterations = 5;
  const auto res = train(cloud, {{cam, testing::random_image(rng, 8, 8), GrayMap(8, 8, 0.0)}}, cfg);
  EXPECT_EQ(res.cloud.means, cloud.means);
  EXPECT_EQ(res.loss_log, std::vector<double>(5, 0.0));
}

}  // namespace
}  // namespace vista
