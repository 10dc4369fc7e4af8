#include "vista/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vista/error.hpp"
#include "vista/renderer.hpp"

namespace vista {

std::vector<int> select_adjacent_views(const std::vector<CameraView>& cameras, int i, int v) {
  const int n = static_cast<int>(cameras.size());
  if (i < 0 || i >= n) fail(ErrorKind::kOutOfRange, "view index " + std::to_string(i));
  if (v < 1 || v > n - 1) {
    fail(ErrorKind::kInvalidArgument, "adjacent view count " + std::to_string(v) + " with " +
                                          std::to_string(n) + " views");
  }
  const Eigen::Vector3d c = cameras[i].center();
  std::vector<std::pair<double, int>> dist;
  double scale = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k == i) continue;
    const double d = (cameras[k].center() - c).norm();
    dist.push_back({d, k});
    scale = std::max(scale, d);
  }
  // Distances within a relative 1e-9 count as ties.
  const double tol = 1e-9 * std::max(scale, 1e-12);
  std::stable_sort(dist.begin(), dist.end(), [&](const auto& a, const auto& b) {
    if (std::abs(a.first - b.first) > tol) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  for (int k = 0; k < v; ++k) out.push_back(dist[k].second);
  return out;
}

double point_uncertainty(const Eigen::Vector3d& x, const std::vector<ColorSource>& views,
                         double tau_d) {
  std::vector<Rgb> colors;
  for (const ColorSource& s : views) {
    const CameraView& cam = *s.camera;
    const auto pd = project_point(x, cam);
    if (!pd || pd->depth <= kNearPlane) continue;
    const double u = pd->pixel.x(), v = pd->pixel.y();
    if (u < 0.0 || v < 0.0 || u > cam.width - 1.0 || v > cam.height - 1.0) continue;
    if (s.depth) {
      const double d = sample_bilinear(*s.depth, u, v);
      if (std::abs(pd->depth - d) > tau_d * pd->depth) continue;
    }
    colors.push_back(sample_bilinear(*s.image, u, v));
  }
  if (colors.size() < 2) return kUncertaintySentinel;
  // Two passes on values shifted by the first sample; identical colours give exactly zero.
  Rgb mean = Rgb::Zero();
  for (const Rgb& c : colors) mean += c - colors[0];
  mean /= static_cast<double>(colors.size());
  Rgb var = Rgb::Zero();
  for (const Rgb& c : colors) var += (c - colors[0] - mean).cwiseAbs2();
  return (var / static_cast<double>(colors.size())).mean();
}

UncertaintyMap normalize_uncertainty(const GrayMap& raw) {
  UncertaintyMap out(raw.width, raw.height, 0.0);
  const std::size_t n = raw.data.size();
  if (n == 0) return out;
  const double mean = std::accumulate(raw.data.begin(), raw.data.end(), 0.0) / n;
  double var = 0.0;
  for (double v : raw.data) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (sd < 1e-8) return out;
  for (std::size_t k = 0; k < n; ++k) out.data[k] = std::clamp(raw.data[k] / sd, 0.0, 1.0);
  return out;
}

DepthSet render_depths(const GaussianCloud& cloud, const SceneDataset& dataset,
                       const Rgb& background) {
  DepthSet out;
  for (const auto& v : dataset.views) {
    RenderOutput r = render(cloud, v.camera, background);
    out.depth.push_back(std::move(r.depth));
    out.alpha.push_back(std::move(r.alpha));
  }
  return out;
}

namespace {

GrayMap score_view(const SceneDataset& dataset, int i, const UncertaintyOptions& options,
                   const DepthSet& depths) {
  const auto cams = dataset.cameras();
  const auto adj = select_adjacent_views(cams, i, options.adjacent);
  std::vector<ColorSource> sources;
  if (options.include_reference) {
    sources.push_back({&dataset.views[i].camera, &dataset.views[i].image, &depths.depth[i]});
  }
  for (int k : adj) sources.push_back({&dataset.views[k].camera, &dataset.views[k].image, &depths.depth[k]});

  const CameraView& cam = dataset.views[i].camera;
  GrayMap raw(cam.width, cam.height, 0.0);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      if (depths.alpha[i].at(x, y) < options.min_alpha) continue;
      const double d = depths.depth[i].at(x, y);
      if (!(d > 0.0)) continue;
      const Eigen::Vector3d p = unproject({static_cast<double>(x), static_cast<double>(y)}, d, cam);
      raw.at(x, y) = point_uncertainty(p, sources, options.tau_d);
    }
  }
  return raw;
}

}  // namespace

UncertaintyMap uncertainty_map(const GaussianCloud& cloud, const SceneDataset& dataset, int i,
                               const UncertaintyOptions& options) {
  return normalize_uncertainty(raw_uncertainty_map(cloud, dataset, i, options));
}

GrayMap raw_uncertainty_map(const GaussianCloud& cloud, const SceneDataset& dataset, int i,
                            const UncertaintyOptions& options) {
  return score_view(dataset, i, options, render_depths(cloud, dataset, options.background));
}

std::vector<UncertaintyMap> uncertainty_maps(const GaussianCloud& cloud, const SceneDataset& dataset,
                                             const UncertaintyOptions& options) {
  const DepthSet depths = render_depths(cloud, dataset, options.background);
  std::vector<UncertaintyMap> out;
  for (int i = 0; i < static_cast<int>(dataset.views.size()); ++i) {
    out.push_back(normalize_uncertainty(score_view(dataset, i, options, depths)));
  }
  return out;
}

MaskMap fuse_mask(const UncertaintyMap& u, const MaskMap& m, double theta) {
  require_same_size(u, m, "fuse_mask");
  if (!(theta >= 0.0)) fail(ErrorKind::kInvalidArgument, "theta must be non-negative");
  MaskMap out(u.width, u.height);
  for (std::size_t k = 0; k < u.data.size(); ++k) {
    out.data[k] = std::clamp(u.data[k] * (1.0 - m.data[k]) + theta * m.data[k], 0.0, 1.0);
  }
  return out;
}

}  // namespace vista
