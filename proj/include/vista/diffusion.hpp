#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vista/image.hpp"

namespace vista {

/// channels x height x width tensor, channel-major.
struct Latent {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Latent() = default;
  Latent(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool same_shape(const Latent& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

/// Linear-beta DDPM schedule. Index t runs 0..T; alpha_bar[0] = 1 and alpha_bar[t] multiplies
/// (1 - beta) over 1..t.
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha_bar;
  std::vector<double> sigma;

  static NoiseSchedule linear(int steps = 1000, double beta_start = 1e-4, double beta_end = 0.02);
};

class Denoiser {
 public:
  virtual ~Denoiser() = default;
  /// Predicted noise for z_t at timestep t under `concept_id`.
  virtual Latent predict(const Latent& z_t, int t, const std::string& concept_id) const = 0;
};

/// Returns the exact noise implied by a known clean latent.
class OracleDenoiser : public Denoiser {
 public:
  OracleDenoiser(Latent target, const NoiseSchedule& schedule)
      : target_(std::move(target)), schedule_(schedule) {}
  Latent predict(const Latent& z_t, int t, const std::string& concept_id) const override;

 private:
  Latent target_;
  NoiseSchedule schedule_;
};

class Codec {
 public:
  virtual ~Codec() = default;
  virtual Latent encode(const ImageBuffer& image) const = 0;
  virtual ImageBuffer decode(const Latent& z) const = 0;
};

class IdentityCodec : public Codec {
 public:
  Latent encode(const ImageBuffer& image) const override;
  ImageBuffer decode(const Latent& z) const override;
};

/// Lossy codec: block means on encode, nearest upsampling on decode.
class AvgPoolCodec : public Codec {
 public:
  explicit AvgPoolCodec(int factor) : factor_(factor) {}
  Latent encode(const ImageBuffer& image) const override;
  ImageBuffer decode(const Latent& z) const override;

 private:
  int factor_;
};

/// sqrt(abar_t) z0 + sqrt(1 - abar_t) eps. Throws kOutOfRange unless 0 <= t <= T.
Latent forward_noise(const Latent& z0, int t, const NoiseSchedule& schedule, const Latent& eps);

struct RepaintOptions {
  bool zero_sigma = false;
};

/// One masked reverse step from t to prev (prev < t; prev = t - 1 is the plain step).
/// Masked cells follow the reverse update; unmasked cells are redrawn from q(z_prev | z0).
/// At prev = 0 the unmasked cells take z0 itself.
Latent repaint_step(const Latent& z_t, const Latent& z0, const GrayMap& mask, int t,
                    const Denoiser& denoiser, const std::string& concept_id,
                    const NoiseSchedule& schedule, std::mt19937_64& rng,
                    const RepaintOptions& options = {}, int prev = -1);

/// Area-weighted average onto a height x width grid; values stay continuous.
GrayMap downsample_mask(const GrayMap& mask, int height, int width);

/// Descending timesteps starting at max(1, round(strength * T)), at most `steps` of them.
std::vector<int> repaint_timesteps(double strength, int steps, const NoiseSchedule& schedule);

/// Encode, noise to the start timestep, run the masked schedule, decode, then composite so that
/// pixels with mask 0 are returned unchanged.
ImageBuffer concept_inpaint_local(const ImageBuffer& image, const GrayMap& fused_mask,
                                  const Denoiser& denoiser, const std::string& concept_id,
                                  const Codec& codec, double strength, int steps,
                                  const NoiseSchedule& schedule, std::mt19937_64& rng,
                                  const RepaintOptions& options = {});

Latent gaussian_latent(int c, int h, int w, std::mt19937_64& rng);

}  // namespace vista
