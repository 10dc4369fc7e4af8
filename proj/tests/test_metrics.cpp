#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "test_util.hpp"
#include "vista/distractor.hpp"
#include "vista/error.hpp"
#include "vista/metrics.hpp"
#include "vista/png_io.hpp"
#include "vista/ssim.hpp"
#include "vista/testgen.hpp"
#include "vista/visibility.hpp"

namespace fs = std::filesystem;

namespace vista {
namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vista_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Psnr, Examples) {
  const ImageBuffer zeros(6, 4, 0.0), ones(6, 4, 1.0), tenth(6, 4, 0.1);
  EXPECT_EQ(psnr(zeros, zeros), 99.0);
  EXPECT_NEAR(psnr(zeros, ones), 0.0, 1e-12);
  EXPECT_NEAR(psnr(zeros, tenth), 20.0, 1e-12);
  EXPECT_THROW(psnr(zeros, ImageBuffer(4, 6)), VistaError);
  double last = 1e9;
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const double p = psnr(zeros, ImageBuffer(6, 4, amp));
    EXPECT_LT(p, last);
    last = p;
  }
}

TEST(SsimMetric, Examples) {
  std::mt19937_64 rng(1);
  const auto a = testing::random_image(rng, 16, 16), b = testing::random_image(rng, 16, 16);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
  EXPECT_GE(ssim(a, b), -1.0);
  EXPECT_LT(ssim(a, b), 1.0 - 1e-9);
  // Constants: variances vanish, only the luminance term remains.
  const double x = 0.4, y = 0.5;
  EXPECT_NEAR(ssim(ImageBuffer(16, 16, x), ImageBuffer(16, 16, y)),
              (2 * x * y + kSsimC1) / (x * x + y * y + kSsimC1), 1e-12);
  EXPECT_THROW(ssim(a, ImageBuffer(4, 4)), VistaError);
}

TEST(MaskBbox, Examples) {
  GrayMap full(7, 5, 1.0);
  const auto box = mask_bbox(full);
  EXPECT_EQ(box.width, 7);
  EXPECT_EQ(box.height, 5);
  GrayMap one(7, 5);
  one.at(4, 2) = 1.0;
  std::mt19937_64 rng(1);
  const auto img = testing::random_image(rng, 7, 5);
  const auto c = masked_bbox_crop(img, one);
  EXPECT_EQ(c.width, 1);
  EXPECT_EQ(c.height, 1);
  EXPECT_EQ(c.pixel(0, 0), img.pixel(4, 2));
  // L shape: rows 2..7 in column 3, row 7 across columns 3..9.
  GrayMap l(12, 10);
  for (int y = 2; y <= 7; ++y) l.at(3, y) = 1.0;
  for (int x = 3; x <= 9; ++x) l.at(x, 7) = 1.0;
  const auto lb = mask_bbox(l);
  EXPECT_EQ(lb.x0, 3);
  EXPECT_EQ(lb.y0, 2);
  EXPECT_EQ(lb.width, 7);
  EXPECT_EQ(lb.height, 6);
  try {
    mask_bbox(GrayMap(3, 3, 0.4));
    FAIL();
  } catch (const VistaError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyMask);
  }
}

TEST(MetricsCsv, Columns) {
  const auto dir = scratch("metrics_csv");
  write_metrics_csv(dir / "m.csv", {{"a", 30.5, 0.9}});
  std::ifstream in(dir / "m.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "name,psnr,ssim,lpips,fid");
  EXPECT_EQ(row.substr(0, 2), "a,");
  EXPECT_EQ(row.substr(row.size() - 2), ",,");
}

TEST(Testgen, DeterministicAndCounts) {
  const FixtureOptions small{.width = 24, .height = 24, .focal = 26, .points = 500, .supersample = 2};
  const auto a = generate_fixture(FixtureKind::kDistractor, 7, small);
  const auto b = generate_fixture(FixtureKind::kDistractor, 7, small);
  ASSERT_EQ(a.dataset.views.size(), 24u);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ(a.dataset.views[i].image.data, b.dataset.views[i].image.data);
  EXPECT_EQ(a.blob_views.size(), 8u);
  int with_blob = 0;
  for (const auto& f : a.footprints) with_blob += *std::max_element(f.data.begin(), f.data.end()) > 0.0;
  EXPECT_EQ(with_blob, 8);
  const auto ring = generate_fixture(FixtureKind::kRing34, 1, {.width = 16, .height = 16, .focal = 18, .points = 200, .supersample = 1});
  EXPECT_EQ(ring.dataset.views.size(), 34u);
  const auto plane = generate_fixture(FixtureKind::kPlane24, 1, {.width = 16, .height = 16, .focal = 18, .points = 200, .supersample = 1});
  for (const auto& v : plane.dataset.views) EXPECT_NEAR((v.camera.center() - Eigen::Vector3d(0, 0, v.camera.center().z())).norm(), 3.0, 1e-9);
  EXPECT_EQ(parse_fixture_kind("ring34"), FixtureKind::kRing34);
  EXPECT_THROW(parse_fixture_kind("cube"), VistaError);
}

TEST(Distractor, TrackMasksMatchFootprints) {
  const auto fx = generate_fixture(FixtureKind::kDistractor, 3, {});
  const auto dir = scratch("distractor_fixture");
  write_fixture(dir, fx);
  const auto ds = load_dataset(dir);
  const auto set = ingest_track_masks(dir / "track_masks", ds, "masa");
  ASSERT_EQ(set.masks.size(), 24u);
  EXPECT_TRUE(set.missing.empty());
  EXPECT_EQ(set.source, "masa");
  for (int i : fx.blob_views) EXPECT_GE(mask_iou(set.masks[i], fx.footprints[i]), 0.9) << i;
}

TEST(Distractor, MissingFramesDefaultToZero) {
  const auto fx = generate_fixture(FixtureKind::kDistractor, 3, {.width = 20, .height = 20, .focal = 22, .points = 100, .supersample = 1});
  const auto dir = scratch("distractor_missing");
  write_fixture(dir, fx);
  const auto ds = load_dataset(dir);
  for (int i : {0, 5, 11}) fs::remove(dir / "track_masks" / ds.views[i].image_name);
  const auto set = ingest_track_masks(dir / "track_masks", ds);
  EXPECT_EQ(set.missing.size(), 3u);
  for (double v : set.masks[5].data) EXPECT_EQ(v, 0.0);
  write_png_gray8(dir / "track_masks" / ds.views[0].image_name, GrayMap(5, 5));
  EXPECT_THROW(ingest_track_masks(dir / "track_masks", ds), VistaError);
}

TEST(Distractor, UnionIsMaxAndLattice) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_stack = [&] {
    MaskStack s;
    for (int k = 0; k < 3; ++k) {
      GrayMap m(6, 5);
      for (double& v : m.data) v = u(rng) < 0.5 ? 0.0 : u(rng);
      s.push_back(m);
    }
    return s;
  };
  const MaskStack a = random_stack(), b = random_stack();
  const TrackMaskSet tb{"t", b, {}}, ta{"t", a, {}};
  const auto ab = union_masks(a, tb);
  const auto ba = union_masks(b, ta);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(ab[k].data, ba[k].data);
    for (std::size_t p = 0; p < ab[k].data.size(); ++p) {
      EXPECT_EQ(ab[k].data[p], std::max(a[k].data[p], b[k].data[p]));
      EXPECT_LE(ab[k].data[p], 1.0);
    }
  }
  EXPECT_EQ(union_masks(a, ta)[1].data, a[1].data);
  MaskStack zeros(3, GrayMap(6, 5));
  EXPECT_EQ(union_masks(a, {"t", zeros, {}})[2].data, a[2].data);
  EXPECT_THROW(union_masks(a, {"t", MaskStack(2, GrayMap(6, 5)), {}}), VistaError);

  // Union feeds fuse_mask: covered pixels take theta.
  const auto fused = fuse_mask(GrayMap(6, 5, 0.7), union_masks(zeros, {"t", MaskStack(3, GrayMap(6, 5, 1.0)), {}})[0], 0.2);
  for (double v : fused.data) EXPECT_EQ(v, 0.2);
}

TEST(Distractor, IoU) {
  GrayMap a(4, 1), b(4, 1);
  a.data = {1, 1, 0, 0};
  b.data = {0, 1, 1, 0};
  EXPECT_NEAR(mask_iou(a, b), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(mask_iou(GrayMap(4, 1), GrayMap(4, 1)), 1.0);
}

}  // namespace
}  // namespace vista
