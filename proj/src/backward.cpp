#include "vista/backward.hpp"

#include <cmath>
#include <string>

#include "vista/detail/raster.hpp"
#include "vista/error.hpp"
#include "vista/sh.hpp"

namespace vista {

namespace {

struct ScreenGrad {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  Eigen::Vector2d mean2d = Eigen::Vector2d::Zero();
  Eigen::Matrix2d conic = Eigen::Matrix2d::Zero();
  double opacity_logit = 0.0;
};

// dL/dq for a (w, x, y, z) quaternion given dL/dR, through the normalisation in the forward pass.
Eigen::Vector4d quaternion_grad(const Eigen::Vector4d& q, const Eigen::Matrix3d& g) {
  const double norm = q.norm();
  const Eigen::Vector4d n = q / norm;
  const double w = n[0], x = n[1], y = n[2], z = n[3];
  Eigen::Matrix3d dw, dx, dy, dz;
  dw << 0, -z, y, z, 0, -x, -y, x, 0;
  dx << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  dy << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  dz << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  const Eigen::Vector4d gn(2 * (g.cwiseProduct(dw)).sum(), 2 * (g.cwiseProduct(dx)).sum(),
                           2 * (g.cwiseProduct(dy)).sum(), 2 * (g.cwiseProduct(dz)).sum());
  return (gn - n * n.dot(gn)) / norm;
}

void splat_backward(const GaussianCloud& cloud, std::size_t j, const CameraView& camera,
                    const Projected2D& p, const ScreenGrad& sg, GradientSet& out) {
  const Eigen::Matrix3d rc = camera.rotation_matrix();
  const Eigen::Vector3d v = rc * cloud.means[j] + camera.translation;
  const double fx = camera.fx, fy = camera.fy;
  const double iz = 1.0 / v.z(), iz2 = iz * iz, iz3 = iz2 * iz;
  Eigen::Matrix<double, 2, 3> jac;
  jac << fx * iz, 0.0, -fx * v.x() * iz2, 0.0, fy * iz, -fy * v.y() * iz2;
  const Eigen::Matrix<double, 2, 3> t = jac * rc;
  const Eigen::Matrix3d r = cloud.rotation_matrix(j);
  const Eigen::Vector3d s = cloud.log_scales[j].array().exp();
  const Eigen::Matrix3d m = r * s.asDiagonal();
  const Eigen::Matrix3d sigma = m * m.transpose();

  // Conic -> 2D covariance -> (J, Sigma).
  const Eigen::Matrix2d g_conic = 0.5 * (sg.conic + sg.conic.transpose());
  const Eigen::Matrix2d g_cov = -p.conic * g_conic * p.conic;
  const Eigen::Matrix<double, 2, 3> g_t = 2.0 * g_cov * t * sigma;
  Eigen::Matrix3d g_sigma = t.transpose() * g_cov * t;
  g_sigma = 0.5 * (g_sigma + g_sigma.transpose());
  const Eigen::Matrix<double, 2, 3> g_j = g_t * rc.transpose();

  Eigen::Vector3d g_v = Eigen::Vector3d::Zero();
  g_v.x() += sg.mean2d.x() * fx * iz + g_j(0, 2) * (-fx * iz2);
  g_v.y() += sg.mean2d.y() * fy * iz + g_j(1, 2) * (-fy * iz2);
  g_v.z() += -sg.mean2d.x() * fx * v.x() * iz2 - sg.mean2d.y() * fy * v.y() * iz2 +
             g_j(0, 0) * (-fx * iz2) + g_j(0, 2) * (2.0 * fx * v.x() * iz3) +
             g_j(1, 1) * (-fy * iz2) + g_j(1, 2) * (2.0 * fy * v.y() * iz3);
  Eigen::Vector3d g_mean = rc.transpose() * g_v;

  // Colour -> SH coefficients and view direction.
  const int deg = cloud.sh_degree;
  const int nk = sh_coeff_count(deg);
  double basis[16];
  Eigen::Matrix<double, 16, 3> dbasis;
  sh_basis_with_jacobian(deg, p.view_dir, basis, dbasis);
  const double* coeffs = cloud.sh_of(j);
  Eigen::Vector3d g_raw = sg.color;
  const Eigen::Vector3d raw = eval_sh(deg, coeffs, p.view_dir);
  for (int c = 0; c < 3; ++c) {
    const double shifted = raw[c] + 0.5;
    if (shifted <= 0.0 || shifted >= 1.0) g_raw[c] = 0.0;
  }
  double* g_sh = out.sh.data() + j * static_cast<std::size_t>(nk) * 3;
  Eigen::Vector3d g_dir = Eigen::Vector3d::Zero();
  for (int k = 0; k < nk; ++k) {
    double dot = 0.0;
    for (int c = 0; c < 3; ++c) {
      g_sh[k * 3 + c] += basis[k] * g_raw[c];
      dot += coeffs[k * 3 + c] * g_raw[c];
    }
    g_dir += dot * dbasis.row(k).transpose();
  }
  const Eigen::Vector3d dir_raw = cloud.means[j] - camera.center();
  const double len = dir_raw.norm();
  g_mean += (Eigen::Matrix3d::Identity() - p.view_dir * p.view_dir.transpose()) * g_dir / len;
  out.means[j] += g_mean;

  // Sigma = M M^T, M = R S.
  const Eigen::Matrix3d g_m = 2.0 * g_sigma * m;
  const Eigen::Matrix3d g_r = g_m * s.asDiagonal();
  const Eigen::Matrix3d rt_gm = r.transpose() * g_m;
  for (int k = 0; k < 3; ++k) out.log_scales[j][k] += rt_gm(k, k) * s[k];
  out.rotations[j] += quaternion_grad(cloud.rotations[j], g_r);
  out.opacity_logits[j] += sg.opacity_logit;
}

GradientSet gradients_from_trace(const GaussianCloud& cloud, const CameraView& camera,
                                 const detail::RasterTrace& trace, const ImageBuffer& grad_color,
                                 const Rgb& background) {
  std::vector<ScreenGrad> screen(cloud.size());
  std::vector<double> opacity(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) opacity[j] = cloud.opacity(j);
  const int w = camera.width, h = camera.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      const Eigen::Vector3d g_c = grad_color.pixel(x, y);
      if (g_c.isZero(0.0)) continue;
      Eigen::Vector3d behind = background;
      for (std::uint32_t e = trace.offsets[pix + 1]; e-- > trace.offsets[pix];) {
        const detail::BlendEntry& be = trace.entries[e];
        const Projected2D& p = *trace.projected[be.splat];
        ScreenGrad& sg = screen[be.splat];
        sg.color += (be.alpha * be.transmittance) * g_c;
        const double g_alpha = be.transmittance * g_c.dot(p.color - behind);
        behind = be.alpha * p.color + (1.0 - be.alpha) * behind;

        const double op = opacity[be.splat];
        sg.opacity_logit += g_alpha * be.gaussian * op * (1.0 - op);
        const double g_g = g_alpha * op;
        const Eigen::Vector2d d(x - p.mean2d.x(), y - p.mean2d.y());
        sg.mean2d += g_g * be.gaussian * (p.conic * d);
        sg.conic += (-0.5 * g_g * be.gaussian) * (d * d.transpose());
      }
    }
  }

  GradientSet grads;
  grads.resize(cloud.size(), cloud.sh_degree);
  grads.set_zero();
  grads.screen_grad.assign(cloud.size(), 0.0);
  grads.visible.assign(cloud.size(), false);
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    if (!trace.projected[j]) continue;
    grads.visible[j] = true;
    splat_backward(cloud, j, camera, *trace.projected[j], screen[j], grads);
    grads.screen_grad[j] =
        Eigen::Vector2d(screen[j].mean2d.x() * 0.5 * w, screen[j].mean2d.y() * 0.5 * h).norm();
  }
  return grads;
}

}  // namespace

GradientSet backward_from_image(const GaussianCloud& cloud, const CameraView& camera,
                                const ImageBuffer& grad_color, const Rgb& background,
                                RenderOutput* render_out) {
  detail::RasterTrace trace;
  RenderOutput out = detail::rasterize(cloud, camera, background, &trace);
  require_same_size(out.color, grad_color, "gradient image");
  GradientSet grads = gradients_from_trace(cloud, camera, trace, grad_color, background);
  if (render_out) *render_out = std::move(out);
  return grads;
}

BackwardResult backward(const GaussianCloud& cloud, const CameraView& camera,
                        const ImageBuffer& target, const GrayMap& weights,
                        const LossWeights& lambda, const Rgb& background) {
  BackwardResult result;
  detail::RasterTrace trace;
  result.render = detail::rasterize(cloud, camera, background, &trace);
  ImageBuffer g_img;
  result.loss = loss_weighted(target, result.render.color, weights, lambda, &g_img);
  result.grads = gradients_from_trace(cloud, camera, trace, g_img, background);

  const std::size_t stride = cloud.sh_stride();
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    bool ok = result.grads.means[j].allFinite() && result.grads.log_scales[j].allFinite() &&
              result.grads.rotations[j].allFinite() && std::isfinite(result.grads.opacity_logits[j]);
    for (std::size_t k = 0; ok && k < stride; ++k) ok = std::isfinite(result.grads.sh[j * stride + k]);
    if (!ok) fail(ErrorKind::kNonFiniteGradient, "splat " + std::to_string(j));
  }
  return result;
}

}  // namespace vista
