#pragma once

#include <vector>

#include "vista/camera.hpp"
#include "vista/gaussian_cloud.hpp"
#include "vista/image.hpp"
#include "vista/loss.hpp"
#include "vista/renderer.hpp"

namespace vista {

/// Gradients shaped like the cloud, plus densification statistics for this pass.
struct GradientSet : SplatArrays {
  std::vector<double> screen_grad;  // |dL/d mean2d| in normalised device units
  std::vector<bool> visible;        // not culled in this view
};

struct BackwardResult {
  double loss = 0.0;
  GradientSet grads;
  RenderOutput render;
};

/// Loss of render(cloud, camera) against `target` under `weights`, and its analytic gradient.
/// Throws kNonFiniteGradient naming the first splat whose gradient is not finite.
BackwardResult backward(const GaussianCloud& cloud, const CameraView& camera,
                        const ImageBuffer& target, const GrayMap& weights,
                        const LossWeights& lambda = {}, const Rgb& background = Rgb::Zero());

/// Gradient of the scalar sum(grad_color ⊙ render(cloud).color) with respect to the cloud.
GradientSet backward_from_image(const GaussianCloud& cloud, const CameraView& camera,
                                const ImageBuffer& grad_color, const Rgb& background,
                                RenderOutput* render_out = nullptr);

}  // namespace vista
