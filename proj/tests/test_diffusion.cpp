#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "vista/diffusion.hpp"
#include "vista/error.hpp"

namespace vista {
namespace {

/// Fails the test if consulted.
class PoisonDenoiser : public Denoiser {
 public:
  Latent predict(const Latent& z, int, const std::string&) const override {
    return Latent(z.channels, z.height, z.width, std::nan(""));
  }
};

/// Fixed linear map of its input, independent of t.
class ScaleDenoiser : public Denoiser {
 public:
  Latent predict(const Latent& z, int, const std::string&) const override {
    Latent out = z;
    for (double& v : out.data) v *= 0.3;
    return out;
  }
};

Latent random_latent(std::mt19937_64& rng, int c, int h, int w) { return gaussian_latent(c, h, w, rng); }

double masked_mse(const Latent& a, const Latent& b, const GrayMap& m) {
  double s = 0.0;
  int n = 0;
  for (int c = 0; c < a.channels; ++c)
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x)
        if (m.at(x, y) > 0.0) {
          s += std::pow(a.at(c, y, x) - b.at(c, y, x), 2);
          ++n;
        }
  return s / n;
}

TEST(Schedule, LinearBetaTable) {
  const auto s = NoiseSchedule::linear();
  ASSERT_EQ(s.steps, 1000);
  EXPECT_DOUBLE_EQ(s.beta[1], 1e-4);
  EXPECT_DOUBLE_EQ(s.beta[1000], 0.02);
  EXPECT_EQ(s.alpha_bar[0], 1.0);
  for (int t = 1; t <= 1000; ++t) {
    EXPECT_GT(s.beta[t], 0.0);
    EXPECT_LT(s.beta[t], 1.0);
    EXPECT_LT(s.alpha_bar[t], s.alpha_bar[t - 1]);
    EXPECT_DOUBLE_EQ(s.sigma[t], std::sqrt(s.beta[t]));
  }
}

TEST(ForwardNoise, ClosedForms) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(1);
  const auto z0 = random_latent(rng, 2, 3, 4);
  const auto eps = random_latent(rng, 2, 3, 4);
  EXPECT_EQ(forward_noise(z0, 0, s, eps).data, z0.data);
  const Latent zero(2, 3, 4);
  const auto scaled = forward_noise(z0, 300, s, zero);
  for (std::size_t k = 0; k < z0.data.size(); ++k) {
    EXPECT_DOUBLE_EQ(scaled.data[k], std::sqrt(s.alpha_bar[300]) * z0.data[k]);
  }
  // alpha_bar at T from the beta definition.
  double ab = 1.0;
  for (int t = 1; t <= 1000; ++t) ab *= 1.0 - (1e-4 + (0.02 - 1e-4) * (t - 1) / 999.0);
  const auto full = forward_noise(Latent(1, 2, 2, 1.0), 1000, s, Latent(1, 2, 2, 1.0));
  for (double v : full.data) EXPECT_NEAR(v, std::sqrt(ab) + std::sqrt(1.0 - ab), 1e-12);
  EXPECT_THROW(forward_noise(z0, 1001, s, eps), VistaError);
  EXPECT_THROW(forward_noise(z0, -1, s, eps), VistaError);
  EXPECT_THROW(forward_noise(z0, 3, s, Latent(1, 1, 1)), VistaError);
}

TEST(ForwardNoise, EmpiricalVariance) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(2);
  const Latent z0(1, 100, 100, 0.0);
  for (int t : {10, 250, 900}) {
    const auto z = forward_noise(z0, t, s, gaussian_latent(1, 100, 100, rng));
    double m = 0, v = 0;
    for (double x : z.data) m += x;
    m /= z.data.size();
    for (double x : z.data) v += (x - m) * (x - m);
    v /= z.data.size();
    EXPECT_NEAR(v / (1.0 - s.alpha_bar[t]), 1.0, 0.05) << t;
  }
}

TEST(RepaintStep, UnmaskedPathIsForwardNoise) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(3);
  const auto z0 = random_latent(rng, 3, 4, 5);
  const auto zt = random_latent(rng, 3, 4, 5);
  const GrayMap m(5, 4, 0.0);
  std::mt19937_64 a(77), b(77);
  const auto out = repaint_step(zt, z0, m, 400, PoisonDenoiser(), "c", s, a);
  const auto expected = forward_noise(z0, 399, s, gaussian_latent(3, 4, 5, b));
  EXPECT_EQ(out.data, expected.data);
  EXPECT_EQ(repaint_step(zt, z0, m, 1, PoisonDenoiser(), "c", s, a).data, z0.data);
}

TEST(RepaintStep, FullyMaskedIsPlainReverseStep) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(4);
  const auto z0 = random_latent(rng, 2, 3, 3);
  const auto zt = random_latent(rng, 2, 3, 3);
  const GrayMap m(3, 3, 1.0);
  const int t = 500;
  const double at = 1.0 - s.beta[t];
  const ScaleDenoiser den;

  std::mt19937_64 r1(5);
  const auto zs = repaint_step(zt, z0, m, t, den, "c", s, r1, {.zero_sigma = true});
  for (std::size_t k = 0; k < zt.data.size(); ++k) {
    const double expected = (zt.data[k] - s.beta[t] / std::sqrt(1.0 - s.alpha_bar[t]) * 0.3 * zt.data[k]) / std::sqrt(at);
    EXPECT_NEAR(zs.data[k], expected, 1e-9);
  }

  // With noise: the known-path draw comes first, then xi.
  std::mt19937_64 r2(6), r3(6);
  const auto noisy = repaint_step(zt, z0, m, t, den, "c", s, r2);
  gaussian_latent(2, 3, 3, r3);
  const auto xi = gaussian_latent(2, 3, 3, r3);
  for (std::size_t k = 0; k < zt.data.size(); ++k) {
    const double expected = (zt.data[k] - s.beta[t] / std::sqrt(1.0 - s.alpha_bar[t]) * 0.3 * zt.data[k]) / std::sqrt(at) +
                            s.sigma[t] * xi.data[k];
    EXPECT_NEAR(noisy.data[k], expected, 1e-9);
  }

  // t = 1 takes no noise.
  std::mt19937_64 r4(7);
  const auto last = repaint_step(zt, z0, m, 1, den, "c", s, r4);
  for (std::size_t k = 0; k < zt.data.size(); ++k) {
    const double expected = (zt.data[k] - s.beta[1] / std::sqrt(1.0 - s.alpha_bar[1]) * 0.3 * zt.data[k]) / std::sqrt(1.0 - s.beta[1]);
    EXPECT_NEAR(last.data[k], expected, 1e-9);
  }
}

TEST(RepaintStep, RangeChecks) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(8);
  const Latent z(1, 2, 2);
  EXPECT_THROW(repaint_step(z, z, GrayMap(2, 2), 0, ScaleDenoiser(), "c", s, rng), VistaError);
  EXPECT_THROW(repaint_step(z, z, GrayMap(2, 2), 1001, ScaleDenoiser(), "c", s, rng), VistaError);
  EXPECT_THROW(repaint_step(z, z, GrayMap(3, 2), 5, ScaleDenoiser(), "c", s, rng), VistaError);
}

TEST(RepaintStep, OracleFullRolloutRecoversMaskedRegion) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(9);
  const auto z0 = random_latent(rng, 4, 8, 8);
  GrayMap m(8, 8, 0.0);
  for (int y = 2; y < 6; ++y)
    for (int x = 1; x < 5; ++x) m.at(x, y) = 1.0;
  const OracleDenoiser oracle(z0, s);
  Latent z = gaussian_latent(4, 8, 8, rng);
  for (int t = s.steps; t >= 1; --t) z = repaint_step(z, z0, m, t, oracle, "c", s, rng, {.zero_sigma = true});
  EXPECT_LE(masked_mse(z, z0, m), 1e-3);
}

TEST(DownsampleMask, AreaAverage) {
  EXPECT_EQ(downsample_mask(GrayMap(8, 8, 1.0), 2, 2).data, std::vector<double>(4, 1.0));
  EXPECT_EQ(downsample_mask(GrayMap(8, 8, 0.0), 2, 2).data, std::vector<double>(4, 0.0));
  GrayMap block(2, 2);
  block.data = {1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(downsample_mask(block, 1, 1).data[0], 0.5);
  GrayMap odd(3, 1);
  odd.data = {1, 0, 0};
  // Cell 0 covers [0, 1.5): one full pixel and half of another.
  EXPECT_NEAR(downsample_mask(odd, 1, 2).data[0], 1.0 / 1.5, 1e-15);
}

TEST(Timesteps, EvenlySpacedFromStrength) {
  const auto s = NoiseSchedule::linear();
  const auto full = repaint_timesteps(1.0, 50, s);
  ASSERT_EQ(full.size(), 50u);
  EXPECT_EQ(full.front(), 1000);
  EXPECT_EQ(full[1], 980);
  EXPECT_EQ(full.back(), 20);
  const auto weak = repaint_timesteps(0.2, 50, s);
  EXPECT_EQ(weak.front(), 200);
  EXPECT_EQ(weak.back(), 4);
  EXPECT_EQ(repaint_timesteps(0.001, 50, s), std::vector<int>{1});
  EXPECT_THROW(repaint_timesteps(0.0, 50, s), VistaError);
  EXPECT_THROW(repaint_timesteps(1.0, 0, s), VistaError);
}

TEST(ConceptInpaint, ZeroMaskReturnsInputExactly) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(10);
  const auto img = testing::random_image(rng, 8, 8);
  const auto out = concept_inpaint_local(img, GrayMap(8, 8), PoisonDenoiser(), "c", IdentityCodec(), 1.0, 50, s, rng);
  EXPECT_EQ(out.data, img.data);
}

TEST(ConceptInpaint, OracleRecoversCleanImage) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 rng(11);
  const auto clean = testing::random_image(rng, 12, 12);
  auto dirty = clean;
  GrayMap m(12, 12);
  for (int y = 3; y < 8; ++y)
    for (int x = 4; x < 10; ++x) {
      dirty.set_pixel(x, y, Rgb(1, 0, 1));
      m.at(x, y) = 1.0;
    }
  const IdentityCodec codec;
  const OracleDenoiser oracle(codec.encode(clean), s);
  const auto out = concept_inpaint_local(dirty, m, oracle, "c", codec, 1.0, 50, s, rng, {.zero_sigma = true});
  double mse = 0.0;
  for (std::size_t k = 0; k < out.data.size(); ++k) mse += std::pow(out.data[k] - clean.data[k], 2);
  EXPECT_LE(mse / out.data.size(), 1e-3);
  for (int x = 0; x < 12; ++x) EXPECT_EQ(out.pixel(x, 0), dirty.pixel(x, 0));
}

TEST(ConceptInpaint, DeterministicUnderSeed) {
  const auto s = NoiseSchedule::linear();
  std::mt19937_64 img_rng(12);
  const auto img = testing::random_image(img_rng, 8, 8);
  GrayMap m(8, 8, 0.0);
  m.at(3, 3) = 1.0;
  m.at(4, 3) = 0.5;
  std::mt19937_64 a(1), b(1);
  const auto out_a = concept_inpaint_local(img, m, ScaleDenoiser(), "c", AvgPoolCodec(2), 0.6, 20, s, a);
  const auto out_b = concept_inpaint_local(img, m, ScaleDenoiser(), "c", AvgPoolCodec(2), 0.6, 20, s, b);
  EXPECT_EQ(out_a.data, out_b.data);
  EXPECT_TRUE(all_finite_in_unit_range(out_a));
  EXPECT_EQ(out_a.pixel(0, 0), img.pixel(0, 0));
}

TEST(Codec, AvgPoolRoundTripOnBlocks) {
  ImageBuffer img(4, 2);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 2; ++y) img.set_pixel(x, y, Rgb::Constant(x < 2 ? 0.25 : 0.75));
  const AvgPoolCodec codec(2);
  const auto z = codec.encode(img);
  EXPECT_EQ(z.width, 2);
  EXPECT_EQ(z.height, 1);
  EXPECT_EQ(codec.decode(z).data, img.data);
  EXPECT_THROW(codec.encode(ImageBuffer(3, 2)), VistaError);
}

}  // namespace
}  // namespace vista
