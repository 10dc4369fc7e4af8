#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "vista/camera.hpp"
#include "vista/gaussian_cloud.hpp"
#include "vista/image.hpp"

namespace vista {

inline constexpr double kNearPlane = 0.01;
inline constexpr double kBlurFloor = 0.3;
/// Squared Mahalanobis radius of the 99% ellipse of a 2D Gaussian.
inline constexpr double kEllipse99 = 9.210340371976184;
inline constexpr double kTransmittanceStop = 1e-4;

struct Projected2D {
  Eigen::Vector2d mean2d;
  Eigen::Matrix2d cov2d;
  Eigen::Matrix2d conic;  // cov2d inverse
  double depth = 0.0;
  Eigen::Vector3d color;  // clamped to [0,1]
  Eigen::Vector3d view_dir;
};

/// Projects splat `j`; nullopt when it is culled.
std::optional<Projected2D> project_splat(const GaussianCloud& cloud, std::size_t j,
                                         const CameraView& camera);

struct RenderOutput {
  ImageBuffer color;
  GrayMap depth;
  GrayMap alpha;
};

RenderOutput render(const GaussianCloud& cloud, const CameraView& camera,
                    const Rgb& background = Rgb::Zero());

/// Reference implementation: every pixel visits every retained splat.
RenderOutput render_naive(const GaussianCloud& cloud, const CameraView& camera,
                          const Rgb& background = Rgb::Zero());

}  // namespace vista
