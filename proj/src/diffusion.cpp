#include "vista/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "vista/error.hpp"

namespace vista {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
  if (steps < 1) fail(ErrorKind::kInvalidArgument, "schedule needs at least one step");
  NoiseSchedule s;
  s.steps = steps;
  s.beta.assign(steps + 1, 0.0);
  s.alpha_bar.assign(steps + 1, 1.0);
  s.sigma.assign(steps + 1, 0.0);
  for (int t = 1; t <= steps; ++t) {
    s.beta[t] = steps == 1 ? beta_start
                           : beta_start + (beta_end - beta_start) * (t - 1) / (steps - 1.0);
    s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.beta[t]);
    s.sigma[t] = std::sqrt(s.beta[t]);
  }
  return s;
}

Latent OracleDenoiser::predict(const Latent& z_t, int t, const std::string&) const {
  if (!z_t.same_shape(target_)) fail(ErrorKind::kDimensionMismatch, "oracle target shape");
  const double a = std::sqrt(schedule_.alpha_bar[t]);
  const double b = std::sqrt(1.0 - schedule_.alpha_bar[t]);
  Latent eps(z_t.channels, z_t.height, z_t.width);
  for (std::size_t k = 0; k < eps.data.size(); ++k) eps.data[k] = (z_t.data[k] - a * target_.data[k]) / b;
  return eps;
}

Latent IdentityCodec::encode(const ImageBuffer& image) const {
  Latent z(3, image.height, image.width);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) z.at(c, y, x) = image.at(x, y, c);
  return z;
}

ImageBuffer IdentityCodec::decode(const Latent& z) const {
  ImageBuffer img(z.width, z.height);
  for (int y = 0; y < z.height; ++y)
    for (int x = 0; x < z.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = z.at(c, y, x);
  return img;
}

Latent AvgPoolCodec::encode(const ImageBuffer& image) const {
  if (image.width % factor_ != 0 || image.height % factor_ != 0) {
    fail(ErrorKind::kDimensionMismatch, "image size not divisible by codec factor");
  }
  Latent z(3, image.height / factor_, image.width / factor_);
  const double inv = 1.0 / (factor_ * factor_);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) z.at(c, y / factor_, x / factor_) += image.at(x, y, c) * inv;
  return z;
}

ImageBuffer AvgPoolCodec::decode(const Latent& z) const {
  ImageBuffer img(z.width * factor_, z.height * factor_);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = z.at(c, y / factor_, x / factor_);
  return img;
}

Latent gaussian_latent(int c, int h, int w, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Latent z(c, h, w);
  for (double& v : z.data) v = normal(rng);
  return z;
}

Latent forward_noise(const Latent& z0, int t, const NoiseSchedule& schedule, const Latent& eps) {
  if (t < 0 || t > schedule.steps) fail(ErrorKind::kOutOfRange, "timestep " + std::to_string(t));
  if (!z0.same_shape(eps)) fail(ErrorKind::kDimensionMismatch, "noise shape");
  const double a = std::sqrt(schedule.alpha_bar[t]);
  const double b = std::sqrt(1.0 - schedule.alpha_bar[t]);
  Latent z(z0.channels, z0.height, z0.width);
  for (std::size_t k = 0; k < z.data.size(); ++k) z.data[k] = a * z0.data[k] + b * eps.data[k];
  return z;
}

Latent repaint_step(const Latent& z_t, const Latent& z0, const GrayMap& mask, int t,
                    const Denoiser& denoiser, const std::string& concept_id,
                    const NoiseSchedule& schedule, std::mt19937_64& rng,
                    const RepaintOptions& options, int prev) {
  if (t < 1 || t > schedule.steps) fail(ErrorKind::kOutOfRange, "timestep " + std::to_string(t));
  if (prev < 0) prev = t - 1;
  if (prev >= t) fail(ErrorKind::kOutOfRange, "previous timestep must be below t");
  if (!z_t.same_shape(z0) || mask.width != z0.width || mask.height != z0.height) {
    fail(ErrorKind::kDimensionMismatch, "repaint inputs");
  }
  const int c = z0.channels, h = z0.height, w = z0.width;

  // Known path: fresh draw from q(z_prev | z0), or z0 itself at the end.
  Latent known = z0;
  if (prev > 0) known = forward_noise(z0, prev, schedule, gaussian_latent(c, h, w, rng));

  const double alpha = schedule.alpha_bar[t] / schedule.alpha_bar[prev];
  const double beta = 1.0 - alpha;
  const Latent eps = denoiser.predict(z_t, t, concept_id);
  const double coef = beta / std::sqrt(1.0 - schedule.alpha_bar[t]);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
  const double sigma = (prev == 0 || options.zero_sigma) ? 0.0 : std::sqrt(beta);
  Latent xi(c, h, w, 0.0);
  if (sigma > 0.0) xi = gaussian_latent(c, h, w, rng);

  Latent out(c, h, w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t k = (static_cast<std::size_t>(ch) * h + y) * w + x;
        const double m = mask.at(x, y);
        if (m == 0.0) {
          out.data[k] = known.data[k];
          continue;
        }
        const double unknown = inv_sqrt_alpha * (z_t.data[k] - coef * eps.data[k]) + sigma * xi.data[k];
        out.data[k] = m == 1.0 ? unknown : (1.0 - m) * known.data[k] + m * unknown;
      }
    }
  }
  return out;
}

GrayMap downsample_mask(const GrayMap& mask, int height, int width) {
  if (height < 1 || width < 1) fail(ErrorKind::kInvalidArgument, "latent size");
  GrayMap out(width, height, 0.0);
  const double sx = static_cast<double>(mask.width) / width;
  const double sy = static_cast<double>(mask.height) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double x0 = x * sx, x1 = (x + 1) * sx, y0 = y * sy, y1 = (y + 1) * sy;
      double acc = 0.0, area = 0.0;
      for (int py = static_cast<int>(std::floor(y0)); py < std::ceil(y1) && py < mask.height; ++py) {
        const double oy = std::min(y1, py + 1.0) - std::max(y0, static_cast<double>(py));
        for (int px = static_cast<int>(std::floor(x0)); px < std::ceil(x1) && px < mask.width; ++px) {
          const double ox = std::min(x1, px + 1.0) - std::max(x0, static_cast<double>(px));
          acc += ox * oy * mask.at(px, py);
          area += ox * oy;
        }
      }
      out.at(x, y) = area > 0.0 ? acc / area : 0.0;
    }
  }
  return out;
}

std::vector<int> repaint_timesteps(double strength, int steps, const NoiseSchedule& schedule) {
  if (!(strength > 0.0 && strength <= 1.0)) fail(ErrorKind::kInvalidArgument, "strength must be in (0,1]");
  if (steps < 1) fail(ErrorKind::kInvalidArgument, "steps must be positive");
  const int start = std::max(1, static_cast<int>(std::lround(strength * schedule.steps)));
  std::vector<int> ts;
  for (int s = steps; s >= 1; --s) {
    const int t = std::max(1, static_cast<int>(std::lround(static_cast<double>(start) * s / steps)));
    if (ts.empty() || t < ts.back()) ts.push_back(t);
  }
  return ts;
}

ImageBuffer concept_inpaint_local(const ImageBuffer& image, const GrayMap& fused_mask,
                                  const Denoiser& denoiser, const std::string& concept_id,
                                  const Codec& codec, double strength, int steps,
                                  const NoiseSchedule& schedule, std::mt19937_64& rng,
                                  const RepaintOptions& options) {
  require_same_size(image, fused_mask, "inpaint mask");
  const auto ts = repaint_timesteps(strength, steps, schedule);
  if (std::all_of(fused_mask.data.begin(), fused_mask.data.end(), [](double m) { return m == 0.0; })) {
    return image;
  }
  const Latent z0 = codec.encode(image);
  const GrayMap m = downsample_mask(fused_mask, z0.height, z0.width);
  Latent z = forward_noise(z0, ts.front(), schedule,
                           gaussian_latent(z0.channels, z0.height, z0.width, rng));
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const int prev = k + 1 < ts.size() ? ts[k + 1] : 0;
    z = repaint_step(z, z0, m, ts[k], denoiser, concept_id, schedule, rng, options, prev);
  }
  ImageBuffer decoded = codec.decode(z);
  if (!same_size(decoded, image)) {
    fail(ErrorKind::kDimensionMismatch, "decoder output size differs from input image");
  }
  for (double& v : decoded.data) v = std::clamp(v, 0.0, 1.0);
  return blend(image, decoded, fused_mask);
}

}  // namespace vista
