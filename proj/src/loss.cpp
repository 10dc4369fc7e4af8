#include "vista/loss.hpp"

#include <cmath>
#include <numeric>

#include "vista/error.hpp"
#include "vista/ssim.hpp"

namespace vista {

void validate(const LossWeights& lambda) {
  if (lambda.l1 < 0.0 || lambda.dssim < 0.0 || std::abs(lambda.l1 + lambda.dssim - 1.0) > 1e-9) {
    fail(ErrorKind::kInvalidArgument, "loss weights must be non-negative and sum to 1");
  }
}

double loss_weighted(const ImageBuffer& target, const ImageBuffer& rendered, const GrayMap& weights,
                     const LossWeights& lambda, ImageBuffer* grad_rendered) {
  require_same_size(target, rendered, "loss");
  require_same_size(target, weights, "loss weights");
  const double total_w = std::accumulate(weights.data.begin(), weights.data.end(), 0.0);
  if (!(total_w > 0.0)) fail(ErrorKind::kInvalidArgument, "weight map is all zero");

  const double scale = 1.0 / (3.0 * total_w);
  double l1 = 0.0;
  for (std::size_t i = 0; i < target.data.size(); ++i) {
    l1 += weights.data[i / 3] * std::abs(rendered.data[i] - target.data[i]);
  }
  l1 *= scale;

  const double s = ssim_weighted(rendered, target, weights, grad_rendered);
  if (grad_rendered) {
    for (std::size_t i = 0; i < target.data.size(); ++i) {
      const double diff = rendered.data[i] - target.data[i];
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      double& g = grad_rendered->data[i];
      g = lambda.l1 * weights.data[i / 3] * sign * scale - 0.5 * lambda.dssim * g;
    }
  }
  return lambda.l1 * l1 + lambda.dssim * 0.5 * (1.0 - s);
}

}  // namespace vista
