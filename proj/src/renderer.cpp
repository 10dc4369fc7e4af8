#include "vista/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vista/detail/raster.hpp"
#include "vista/sh.hpp"

namespace vista {

namespace {

constexpr int kTile = 8;
// Beyond this squared radius a gaussian is below 1e-12 and is skipped by the tiled pass.
const double kTileCutoff = 2.0 * std::log(1e12);

double edge_min(const Eigen::Matrix2d& a, double fixed_delta, double lo, double hi, bool fixed_is_x) {
  // Minimum over t in [lo, hi] of the quadratic form with one coordinate fixed.
  const double a_fixed = fixed_is_x ? a(0, 0) : a(1, 1);
  const double a_free = fixed_is_x ? a(1, 1) : a(0, 0);
  const double t = std::clamp(-a(0, 1) * fixed_delta / a_free, lo, hi);
  return a_fixed * fixed_delta * fixed_delta + 2.0 * a(0, 1) * fixed_delta * t + a_free * t * t;
}

// True when the ellipse (x-m)^T A (x-m) <= c touches the rectangle of pixel centres.
bool ellipse_hits_frame(const Eigen::Vector2d& m, const Eigen::Matrix2d& a, double c, int w, int h) {
  const double x0 = 0.0, x1 = w - 1.0, y0 = 0.0, y1 = h - 1.0;
  if (m.x() >= x0 && m.x() <= x1 && m.y() >= y0 && m.y() <= y1) return true;
  const double lo_y = y0 - m.y(), hi_y = y1 - m.y();
  const double lo_x = x0 - m.x(), hi_x = x1 - m.x();
  return edge_min(a, x0 - m.x(), lo_y, hi_y, true) <= c ||
         edge_min(a, x1 - m.x(), lo_y, hi_y, true) <= c ||
         edge_min(a, y0 - m.y(), lo_x, hi_x, false) <= c ||
         edge_min(a, y1 - m.y(), lo_x, hi_x, false) <= c;
}

std::vector<std::uint32_t> depth_order(const std::vector<std::optional<Projected2D>>& proj) {
  std::vector<std::uint32_t> order;
  for (std::uint32_t j = 0; j < proj.size(); ++j) {
    if (proj[j]) order.push_back(j);
  }
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (proj[a]->depth != proj[b]->depth) return proj[a]->depth < proj[b]->depth;
    return a < b;
  });
  return order;
}

struct PixelResult {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double depth_sum = 0.0;
  double transmittance = 1.0;
};

// Per-splat values read by the blending loop, laid out contiguously in depth order.
struct Packed {
  double mx, my;
  double ca, cb, cc;  // conic [[ca, cb], [cb, cc]]
  double opacity;
  double depth;
  double r, g, b;
  std::uint32_t splat;
};

std::vector<Packed> pack(const std::vector<std::optional<Projected2D>>& proj, const GaussianCloud& cloud,
                         const std::vector<std::uint32_t>& order) {
  std::vector<Packed> out;
  out.reserve(order.size());
  for (std::uint32_t j : order) {
    const Projected2D& p = *proj[j];
    out.push_back({p.mean2d.x(), p.mean2d.y(), p.conic(0, 0), p.conic(0, 1), p.conic(1, 1), cloud.opacity(j),
                   p.depth, p.color.x(), p.color.y(), p.color.z(), j});
  }
  return out;
}

// Front-to-back blend of the packed splats listed in `list` at pixel (x, y).
template <typename Emit>
PixelResult blend_pixel(const std::vector<Packed>& packed, const std::vector<std::uint32_t>& list,
                        double x, double y, double cutoff, Emit&& emit) {
  PixelResult r;
  double cr = 0.0, cg = 0.0, cb = 0.0, depth_sum = 0.0, t = 1.0;
  for (std::uint32_t k : list) {
    if (t < kTransmittanceStop) break;
    const Packed& p = packed[k];
    const double dx = x - p.mx, dy = y - p.my;
    const double m2 = p.ca * dx * dx + 2.0 * p.cb * dx * dy + p.cc * dy * dy;
    if (m2 > cutoff) continue;
    const double g = std::exp(-0.5 * m2);
    const double a = p.opacity * g;
    emit(p.splat, a, g, t);
    const double at = a * t;
    cr += p.r * at;
    cg += p.g * at;
    cb += p.b * at;
    depth_sum += p.depth * at;
    t *= 1.0 - a;
  }
  r.color = {cr, cg, cb};
  r.depth_sum = depth_sum;
  r.transmittance = t;
  return r;
}

void store(RenderOutput& out, int x, int y, const PixelResult& r, const Rgb& background) {
  out.color.set_pixel(x, y, r.color + r.transmittance * background);
  const double alpha = 1.0 - r.transmittance;
  out.alpha.at(x, y) = alpha;
  out.depth.at(x, y) = alpha > 0.0 ? r.depth_sum / std::max(alpha, 1e-6) : 0.0;
}

RenderOutput blank(const CameraView& camera) {
  return {ImageBuffer(camera.width, camera.height), GrayMap(camera.width, camera.height),
          GrayMap(camera.width, camera.height)};
}

std::vector<std::optional<Projected2D>> project_all(const GaussianCloud& cloud,
                                                    const CameraView& camera) {
  std::vector<std::optional<Projected2D>> proj(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) proj[j] = project_splat(cloud, j, camera);
  return proj;
}

}  // namespace

std::optional<Projected2D> project_splat(const GaussianCloud& cloud, std::size_t j,
                                         const CameraView& camera) {
  const Eigen::Matrix3d rc = camera.rotation_matrix();
  const Eigen::Vector3d p = rc * cloud.means[j] + camera.translation;
  if (p.z() <= kNearPlane) return std::nullopt;

  const double iz = 1.0 / p.z();
  Eigen::Matrix<double, 2, 3> jac;
  jac << camera.fx * iz, 0.0, -camera.fx * p.x() * iz * iz,
      0.0, camera.fy * iz, -camera.fy * p.y() * iz * iz;
  const Eigen::Matrix<double, 2, 3> t = jac * rc;

  Projected2D out;
  out.mean2d = {camera.fx * p.x() * iz + camera.cx, camera.fy * p.y() * iz + camera.cy};
  out.cov2d = t * cloud.covariance(j) * t.transpose();
  out.cov2d(0, 1) = out.cov2d(1, 0) = 0.5 * (out.cov2d(0, 1) + out.cov2d(1, 0));
  out.cov2d += kBlurFloor * Eigen::Matrix2d::Identity();
  out.conic = out.cov2d.inverse();
  out.depth = p.z();
  if (!ellipse_hits_frame(out.mean2d, out.conic, kEllipse99, camera.width, camera.height)) {
    return std::nullopt;
  }

  out.view_dir = (cloud.means[j] - camera.center()).normalized();
  const Eigen::Vector3d raw = eval_sh(cloud.sh_degree, cloud.sh_of(j), out.view_dir);
  out.color = (raw.array() + 0.5).min(1.0).max(0.0).matrix();
  return out;
}

namespace detail {

RenderOutput rasterize(const GaussianCloud& cloud, const CameraView& camera, const Rgb& background,
                       RasterTrace* trace) {
  RenderOutput out = blank(camera);
  const int w = camera.width, h = camera.height;
  auto proj = project_all(cloud, camera);
  const auto order = depth_order(proj);
  const auto packed = pack(proj, cloud, order);

  const int tiles_x = (w + kTile - 1) / kTile, tiles_y = (h + kTile - 1) / kTile;
  std::vector<std::vector<std::uint32_t>> tiles(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (std::uint32_t k = 0; k < order.size(); ++k) {
    const Projected2D& p = *proj[order[k]];
    const double rx = std::sqrt(kTileCutoff * p.cov2d(0, 0));
    const double ry = std::sqrt(kTileCutoff * p.cov2d(1, 1));
    const int px0 = std::max(0, static_cast<int>(std::floor(p.mean2d.x() - rx)));
    const int px1 = std::min(w - 1, static_cast<int>(std::ceil(p.mean2d.x() + rx)));
    const int py0 = std::max(0, static_cast<int>(std::floor(p.mean2d.y() - ry)));
    const int py1 = std::min(h - 1, static_cast<int>(std::ceil(p.mean2d.y() + ry)));
    if (px0 > px1 || py0 > py1) continue;
    for (int ty = py0 / kTile; ty <= py1 / kTile; ++ty) {
      for (int tx = px0 / kTile; tx <= px1 / kTile; ++tx) {
        tiles[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(k);
      }
    }
  }

  if (trace) {
    trace->offsets.assign(static_cast<std::size_t>(w) * h + 1, 0);
    trace->entries.clear();
  }
  // Pixels are visited in row-major order so trace offsets stay monotone.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& list = tiles[static_cast<std::size_t>(y / kTile) * tiles_x + x / kTile];
      PixelResult r;
      if (trace) {
        r = blend_pixel(packed, list, x, y, kTileCutoff, [&](std::uint32_t j, double a, double g, double t) {
          trace->entries.push_back({j, a, g, t});
        });
        trace->offsets[static_cast<std::size_t>(y) * w + x + 1] =
            static_cast<std::uint32_t>(trace->entries.size());
      } else {
        r = blend_pixel(packed, list, x, y, kTileCutoff, [](std::uint32_t, double, double, double) {});
      }
      store(out, x, y, r, background);
    }
  }
  if (trace) trace->projected = std::move(proj);
  return out;
}

}  // namespace detail

RenderOutput render(const GaussianCloud& cloud, const CameraView& camera, const Rgb& background) {
  return detail::rasterize(cloud, camera, background, nullptr);
}

RenderOutput render_naive(const GaussianCloud& cloud, const CameraView& camera,
                          const Rgb& background) {
  RenderOutput out = blank(camera);
  const auto proj = project_all(cloud, camera);
  const auto order = depth_order(proj);
  const auto packed = pack(proj, cloud, order);
  std::vector<std::uint32_t> all(order.size());
  for (std::uint32_t k = 0; k < all.size(); ++k) all[k] = k;
  const double no_cutoff = std::numeric_limits<double>::infinity();
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const PixelResult r =
          blend_pixel(packed, all, x, y, no_cutoff, [](std::uint32_t, double, double, double) {});
      store(out, x, y, r, background);
    }
  }
  return out;
}

}  // namespace vista
